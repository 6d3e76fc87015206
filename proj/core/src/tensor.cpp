#include "rainfree/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace rainfree {

std::string Shape::str() const {
  std::ostringstream os;
  os << '[' << n << 'x' << c << 'x' << h << 'x' << w << ']';
  return os.str();
}

Tensor::Tensor(Shape shape, float fill) : shape_(shape) {
  if (shape.n < 0 || shape.c < 0 || shape.h < 0 || shape.w < 0) {
    throw std::invalid_argument("negative tensor dimension " + shape.str());
  }
  data_.assign(shape.numel(), fill);
}

Tensor::Tensor(Shape shape, std::vector<float> values) : shape_(shape), data_(std::move(values)) {
  if (data_.size() != shape.numel()) {
    throw std::invalid_argument("tensor value count " + std::to_string(data_.size()) +
                                " does not match shape " + shape.str());
  }
}

Tensor Tensor::sample(int n) const {
  if (n < 0 || n >= shape_.n) throw std::out_of_range("sample index out of range");
  Shape s{1, shape_.c, shape_.h, shape_.w};
  const auto count = s.numel();
  const auto first = data_.begin() + static_cast<std::ptrdiff_t>(count * n);
  return Tensor(s, std::vector<float>(first, first + static_cast<std::ptrdiff_t>(count)));
}

void Tensor::fill(float v) { std::fill(data_.begin(), data_.end(), v); }

float Tensor::item() const {
  if (data_.size() != 1) {
    throw std::logic_error("item() on non-scalar tensor " + shape_.str());
  }
  return data_[0];
}

bool Tensor::all_finite() const {
  return std::all_of(data_.begin(), data_.end(), [](float v) { return std::isfinite(v); });
}

void require_same_shape(const Tensor& a, const Tensor& b, const char* what) {
  if (a.shape() != b.shape()) {
    throw std::invalid_argument(std::string(what) + ": shape mismatch " + a.shape().str() +
                                " vs " + b.shape().str());
  }
}

Tensor stack(std::span<const Tensor> samples) {
  if (samples.empty()) throw std::invalid_argument("stack: no samples");
  const Shape first = samples.front().shape();
  int total = 0;
  for (const auto& t : samples) {
    if (t.c() != first.c || t.h() != first.h || t.w() != first.w) {
      throw std::invalid_argument("stack: incompatible shapes " + first.str() + " vs " +
                                  t.shape().str());
    }
    total += t.n();
  }
  Tensor out({total, first.c, first.h, first.w});
  float* dst = out.ptr();
  for (const auto& t : samples) dst = std::copy(t.data().begin(), t.data().end(), dst);
  return out;
}

}  // namespace rainfree
