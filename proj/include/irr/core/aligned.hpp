#pragma once

#include <cstddef>
#include <new>
#include <vector>

namespace irr::core {

/// Cache-line aligned allocation. Vectorized reductions peel a prologue whose
/// length depends on the start address, so buffers handed to Eigen need a
/// fixed alignment for results to be reproducible bit for bit.
template <class T>
struct AlignedAllocator {
  using value_type = T;
  static constexpr std::align_val_t alignment{64};

  AlignedAllocator() = default;
  template <class U>
  AlignedAllocator(const AlignedAllocator<U>&) noexcept {}

  T* allocate(std::size_t n) { return static_cast<T*>(::operator new(n * sizeof(T), alignment)); }
  void deallocate(T* p, std::size_t) noexcept { ::operator delete(p, alignment); }

  template <class U>
  bool operator==(const AlignedAllocator<U>&) const noexcept {
    return true;
  }
};

using AlignedBuffer = std::vector<double, AlignedAllocator<double>>;

}  // namespace irr::core
