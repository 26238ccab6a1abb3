#include "irr/core/fields.hpp"

namespace irr::core {

FlowField::FlowField(Tensor uv) : uv_(std::move(uv)) {
  if (uv_.rank() != 3 || uv_.channels() != 2) {
    throw InvalidArgument("FlowField needs a (2,H,W) tensor, got " + shape_string(uv_.shape()));
  }
}

OcclusionMap::OcclusionMap(Tensor data) : data_(std::move(data)) {
  if (data_.rank() != 3 || data_.channels() != 1) {
    throw InvalidArgument("OcclusionMap needs a (1,H,W) tensor, got " + shape_string(data_.shape()));
  }
}

bool OcclusionMap::is_binary() const {
  for (double v : data_.values())
    if (v != 0.0 && v != 1.0) return false;
  return true;
}

Image::Image(Tensor data) : data_(std::move(data)) {
  if (data_.rank() != 3 || data_.channels() != 3) {
    throw InvalidArgument("Image needs a (3,H,W) tensor, got " + shape_string(data_.shape()));
  }
}

}  // namespace irr::core
