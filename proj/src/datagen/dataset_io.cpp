#include "irr/datagen/dataset_io.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <thread>

#include "irr/core/random.hpp"

namespace irr::datagen {

namespace fs = std::filesystem;

static_assert(std::endian::native == std::endian::little, "binary IO assumes little-endian");

namespace {

std::string read_all(const fs::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

void write_all(const fs::path& path, const std::string& bytes) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw IoError("cannot open " + path.string() + " for writing");
  os.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!os) throw IoError("write failed for " + path.string());
}

std::string hex64(std::uint64_t v) {
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << v;
  return os.str();
}

}  // namespace

void write_flow(const fs::path& path, const FlowField& flow) {
  const std::int32_t w = flow.width(), h = flow.height();
  std::string bytes("FLO2");
  bytes.append(reinterpret_cast<const char*>(&w), 4);
  bytes.append(reinterpret_cast<const char*>(&h), 4);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const float uv[2] = {static_cast<float>(flow.u(y, x)), static_cast<float>(flow.v(y, x))};
      bytes.append(reinterpret_cast<const char*>(uv), sizeof uv);
    }
  write_all(path, bytes);
}

FlowField read_flow(const fs::path& path) {
  const std::string bytes = read_all(path);
  if (bytes.size() < 12 || bytes.compare(0, 4, "FLO2") != 0) {
    throw FormatError(path.string() + ": bad flow file magic");
  }
  std::int32_t w, h;
  std::memcpy(&w, bytes.data() + 4, 4);
  std::memcpy(&h, bytes.data() + 8, 4);
  if (w < 1 || h < 1) throw FormatError(path.string() + ": invalid flow dimensions");
  const std::size_t expected = 12 + static_cast<std::size_t>(w) * h * 8;
  if (bytes.size() != expected) {
    throw FormatError(path.string() + ": dimension mismatch, header says " + std::to_string(w) +
                      "x" + std::to_string(h) + " (" + std::to_string(expected) +
                      " bytes) but file has " + std::to_string(bytes.size()));
  }
  FlowField f(h, w);
  const char* p = bytes.data() + 12;
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      float uv[2];
      std::memcpy(uv, p, sizeof uv);
      p += sizeof uv;
      f.u(y, x) = uv[0];
      f.v(y, x) = uv[1];
    }
  return f;
}

void write_occlusion(const fs::path& path, const OcclusionMap& occ) {
  std::string bytes = "P5\n" + std::to_string(occ.width()) + " " + std::to_string(occ.height()) +
                      "\n255\n";
  for (int y = 0; y < occ.height(); ++y)
    for (int x = 0; x < occ.width(); ++x) bytes.push_back(occ.at(y, x) >= 0.5 ? '\xff' : '\0');
  write_all(path, bytes);
}

OcclusionMap read_occlusion(const fs::path& path) {
  const std::string bytes = read_all(path);
  std::istringstream hdr(bytes);
  std::string magic;
  int w = 0, h = 0, maxval = 0;
  hdr >> magic >> w >> h >> maxval;
  if (!hdr || magic != "P5" || maxval != 255) throw FormatError(path.string() + ": not an 8-bit P5 PGM");
  if (w < 1 || h < 1) throw FormatError(path.string() + ": invalid PGM dimensions");
  const auto offset = static_cast<std::size_t>(hdr.tellg()) + 1;  // single whitespace byte
  if (bytes.size() != offset + static_cast<std::size_t>(w) * h) {
    throw FormatError(path.string() + ": dimension mismatch in PGM payload");
  }
  OcclusionMap occ(h, w);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const auto v = static_cast<unsigned char>(bytes[offset + static_cast<std::size_t>(y) * w + x]);
      if (v != 0 && v != 255) throw FormatError(path.string() + ": occlusion PGM must be 0/255");
      occ.at(y, x) = v == 255 ? 1.0 : 0.0;
    }
  return occ;
}

void to_json(nlohmann::json& j, const DatasetSpec& d) {
  j = nlohmann::json{{"scene", d.scene},
                     {"base_seed", d.base_seed},
                     {"count", d.count},
                     {"train_fraction", d.train_fraction}};
}

void from_json(const nlohmann::json& j, DatasetSpec& d) {
  d = DatasetSpec{};
  if (j.contains("scene")) j.at("scene").get_to(d.scene);
  if (j.contains("base_seed")) j.at("base_seed").get_to(d.base_seed);
  if (j.contains("count")) j.at("count").get_to(d.count);
  if (j.contains("train_fraction")) j.at("train_fraction").get_to(d.train_fraction);
}

std::vector<const SceneSample*> Dataset::split(const std::string& name) const {
  std::vector<const SceneSample*> out;
  for (std::size_t i = 0; i < records.size(); ++i)
    if (records[i].split == name) out.push_back(&samples[i]);
  return out;
}

std::uint64_t sample_seed(std::uint64_t base_seed, std::size_t id) {
  return core::combine_seeds(base_seed, static_cast<std::uint64_t>(id));
}

std::size_t train_count(const DatasetSpec& spec) {
  if (spec.train_fraction < 0.0 || spec.train_fraction > 1.0) {
    throw core::InvalidArgument("train_fraction must lie in [0, 1]");
  }
  return static_cast<std::size_t>(std::llround(spec.count * spec.train_fraction));
}

namespace {

std::string sample_name(std::size_t id) {
  std::ostringstream os;
  os << std::setw(6) << std::setfill('0') << id;
  return os.str();
}

}  // namespace

Dataset generate_dataset(const DatasetSpec& spec, unsigned threads) {
  spec.scene.validate();
  Dataset ds;
  ds.spec = spec;
  const std::size_t n_train = train_count(spec);
  const std::string hash = hex64(config_hash(spec.scene));
  ds.samples.resize(spec.count);
  ds.records.resize(spec.count);
  auto work = [&](std::size_t begin, std::size_t stride) {
    for (std::size_t i = begin; i < spec.count; i += stride) {
      SceneSample s = make_sample(sample_seed(spec.base_seed, i), spec.scene);
      s.id = sample_name(i);
      quantize(s);
      ds.samples[i] = std::move(s);
    }
  };
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(spec.count)));
  if (threads <= 1) {
    work(0, 1);
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(work, t, threads);
    for (auto& t : pool) t.join();
  }
  for (std::size_t i = 0; i < spec.count; ++i) {
    ManifestRecord& r = ds.records[i];
    r.id = i;
    r.seed = ds.samples[i].seed;
    r.split = i < n_train ? "train" : "val";
    r.config_hash = hash;
    const std::string stem = "samples/" + sample_name(i);
    r.files = {{"img1", stem + "_img1.png"},       {"img2", stem + "_img2.png"},
               {"flow_fw", stem + "_flow_fw.flo2"}, {"flow_bw", stem + "_flow_bw.flo2"},
               {"occ1", stem + "_occ1.pgm"},        {"occ2", stem + "_occ2.pgm"}};
    if (ds.samples[i].valid) r.files["valid"] = stem + "_valid.pgm";
  }
  return ds;
}

void write_dataset(const Dataset& ds, const fs::path& dir) {
  if (ds.records.size() != ds.samples.size()) throw IoError("dataset records and samples disagree");
  fs::create_directories(dir / "samples");
  for (std::size_t i = 0; i < ds.samples.size(); ++i) {
    const SceneSample& s = ds.samples[i];
    const auto& f = ds.records[i].files;
    write_png(dir / f.at("img1"), s.image1);
    write_png(dir / f.at("img2"), s.image2);
    write_flow(dir / f.at("flow_fw"), s.flow_fw);
    write_flow(dir / f.at("flow_bw"), s.flow_bw);
    write_occlusion(dir / f.at("occ1"), s.occ1);
    write_occlusion(dir / f.at("occ2"), s.occ2);
    if (s.valid) write_occlusion(dir / f.at("valid"), OcclusionMap(*s.valid));
  }
  std::string manifest;
  for (const ManifestRecord& r : ds.records) {
    nlohmann::json j{{"id", r.id},
                     {"seed", r.seed},
                     {"split", r.split},
                     {"files", r.files},
                     {"config_hash", r.config_hash}};
    manifest += j.dump() + "\n";
  }
  write_all(dir / "manifest.jsonl", manifest);
  nlohmann::json meta = ds.spec;
  meta["config_hash"] = hex64(config_hash(ds.spec.scene));
  write_all(dir / "dataset.json", meta.dump(2) + "\n");
}

Dataset read_dataset(const fs::path& dir) {
  if (!fs::exists(dir / "dataset.json")) throw IoError("no dataset at " + dir.string());
  Dataset ds;
  try {
    ds.spec = nlohmann::json::parse(read_all(dir / "dataset.json")).get<DatasetSpec>();
  } catch (const nlohmann::json::exception& e) {
    throw FormatError("invalid dataset.json: " + std::string(e.what()));
  }
  std::istringstream lines(read_all(dir / "manifest.jsonl"));
  std::string line;
  while (std::getline(lines, line)) {
    if (line.empty()) continue;
    ManifestRecord r;
    try {
      const auto j = nlohmann::json::parse(line);
      j.at("id").get_to(r.id);
      j.at("seed").get_to(r.seed);
      j.at("split").get_to(r.split);
      j.at("files").get_to(r.files);
      j.at("config_hash").get_to(r.config_hash);
    } catch (const nlohmann::json::exception& e) {
      throw FormatError("invalid manifest line: " + std::string(e.what()));
    }
    SceneSample s;
    s.id = sample_name(r.id);
    s.seed = r.seed;
    s.image1 = read_png(dir / r.files.at("img1"));
    s.image2 = read_png(dir / r.files.at("img2"));
    s.flow_fw = read_flow(dir / r.files.at("flow_fw"));
    s.flow_bw = read_flow(dir / r.files.at("flow_bw"));
    s.occ1 = read_occlusion(dir / r.files.at("occ1"));
    s.occ2 = read_occlusion(dir / r.files.at("occ2"));
    if (r.files.count("valid")) s.valid = read_occlusion(dir / r.files.at("valid")).tensor();
    ds.records.push_back(std::move(r));
    ds.samples.push_back(std::move(s));
  }
  return ds;
}

}  // namespace irr::datagen
