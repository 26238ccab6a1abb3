#include "irr/models/checkpoint.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <vector>

namespace irr::models {
namespace {

static_assert(std::endian::native == std::endian::little, "checkpoint IO assumes little-endian");

constexpr char kMagic[8] = {'I', 'R', 'R', 'C', 'K', 'P', 'T', '1'};

template <typename T>
void put(std::ostream& os, T v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof v);
}

void put_string(std::ostream& os, const std::string& s) {
  put<std::uint32_t>(os, static_cast<std::uint32_t>(s.size()));
  os.write(s.data(), static_cast<std::streamsize>(s.size()));
}

class Reader {
 public:
  explicit Reader(std::istream& is) : is_(is) {}

  template <typename T>
  T get() {
    T v;
    read(&v, sizeof v);
    return v;
  }
  std::string get_string(std::size_t n) {
    std::string s(n, '\0');
    read(s.data(), n);
    return s;
  }
  void read(void* dst, std::size_t n) {
    if (!is_.read(static_cast<char*>(dst), static_cast<std::streamsize>(n))) {
      throw CheckpointError("checkpoint truncated");
    }
  }

 private:
  std::istream& is_;
};

}  // namespace

void save_checkpoint(const Model& model, const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  const std::string cfg = nlohmann::json(model.config()).dump();
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw CheckpointError("cannot open " + path.string() + " for writing");
  os.write(kMagic, sizeof kMagic);
  put<std::uint64_t>(os, cfg.size());
  os.write(cfg.data(), static_cast<std::streamsize>(cfg.size()));
  const auto& sets = model.registry().sets();
  put<std::uint32_t>(os, static_cast<std::uint32_t>(sets.size()));
  for (const auto& set : sets) {
    put_string(os, set->name());
    put<std::uint32_t>(os, static_cast<std::uint32_t>(set->size()));
    for (std::size_t i = 0; i < set->size(); ++i) {
      const core::Tensor& t = set->tensor(i);
      put_string(os, set->key(i));
      put<std::uint32_t>(os, static_cast<std::uint32_t>(t.rank()));
      for (int d : t.shape()) put<std::int32_t>(os, d);
      os.write(reinterpret_cast<const char*>(t.data()),
               static_cast<std::streamsize>(t.size() * sizeof(double)));
    }
  }
  if (!os) throw CheckpointError("write failed for " + path.string());

  std::ofstream side(path.string() + ".json", std::ios::trunc);
  side << nlohmann::json(model.config()).dump(2) << "\n";
  if (!side) throw CheckpointError("write failed for " + path.string() + ".json");
}

Model load_checkpoint(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw CheckpointError("cannot open checkpoint " + path.string());
  Reader r(is);
  char magic[8];
  r.read(magic, sizeof magic);
  if (std::memcmp(magic, kMagic, sizeof kMagic) != 0) {
    throw CheckpointError(path.string() + " is not a checkpoint (bad magic)");
  }
  const auto cfg_len = r.get<std::uint64_t>();
  if (cfg_len > (1u << 24)) throw CheckpointError("implausible config length in checkpoint");
  ModelConfig cfg = nlohmann::json::parse(r.get_string(cfg_len)).get<ModelConfig>();
  Model model(cfg);

  const auto blocks = r.get<std::uint32_t>();
  if (blocks != model.registry().sets().size()) {
    throw CheckpointError("checkpoint block count does not match its config");
  }
  for (std::uint32_t b = 0; b < blocks; ++b) {
    const std::string name = r.get_string(r.get<std::uint32_t>());
    auto set = model.registry().find(name);
    if (!set) throw CheckpointError("checkpoint block '" + name + "' unknown to the model");
    const auto count = r.get<std::uint32_t>();
    if (count != set->size()) throw CheckpointError("tensor count mismatch in block " + name);
    for (std::uint32_t i = 0; i < count; ++i) {
      const std::string key = r.get_string(r.get<std::uint32_t>());
      if (!set->contains(key)) throw CheckpointError("unknown tensor " + name + "." + key);
      core::Tensor& t = set->tensor(key);
      const auto rank = r.get<std::uint32_t>();
      std::vector<int> shape(rank);
      for (auto& d : shape) d = r.get<std::int32_t>();
      if (shape != t.shape()) {
        throw CheckpointError("shape mismatch for " + name + "." + key + ": stored " +
                              core::shape_string(shape) + ", expected " +
                              core::shape_string(t.shape()));
      }
      r.read(t.data(), t.size() * sizeof(double));
    }
  }
  return model;
}

void copy_parameters(const Model& src, Model& dst) {
  const auto& a = src.registry().sets();
  const auto& b = dst.registry().sets();
  if (a.size() != b.size()) throw core::InvalidArgument("copy_parameters: registries differ");
  for (std::size_t s = 0; s < a.size(); ++s) {
    if (a[s]->name() != b[s]->name() || a[s]->size() != b[s]->size()) {
      throw core::InvalidArgument("copy_parameters: block mismatch at " + a[s]->name());
    }
    for (std::size_t i = 0; i < a[s]->size(); ++i) {
      core::require_same_shape(a[s]->tensor(i), b[s]->tensor(i), "copy_parameters");
      b[s]->tensor(i) = a[s]->tensor(i);
    }
  }
}

}  // namespace irr::models
