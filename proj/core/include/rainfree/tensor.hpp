#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace rainfree {

// Batch-major planar layout: N x C x H x W.
struct Shape {
  int n = 0;
  int c = 0;
  int h = 0;
  int w = 0;

  [[nodiscard]] std::size_t numel() const {
    return static_cast<std::size_t>(n) * c * h * w;
  }
  [[nodiscard]] std::size_t plane() const { return static_cast<std::size_t>(h) * w; }
  [[nodiscard]] std::string str() const;

  friend bool operator==(const Shape&, const Shape&) = default;
};

class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(Shape shape, float fill = 0.0F);
  Tensor(Shape shape, std::vector<float> values);

  static Tensor scalar(float v) { return Tensor({1, 1, 1, 1}, v); }

  [[nodiscard]] const Shape& shape() const { return shape_; }
  [[nodiscard]] int n() const { return shape_.n; }
  [[nodiscard]] int c() const { return shape_.c; }
  [[nodiscard]] int h() const { return shape_.h; }
  [[nodiscard]] int w() const { return shape_.w; }
  [[nodiscard]] std::size_t size() const { return data_.size(); }
  [[nodiscard]] bool empty() const { return data_.empty(); }

  [[nodiscard]] std::span<float> data() { return data_; }
  [[nodiscard]] std::span<const float> data() const { return data_; }
  [[nodiscard]] float* ptr() { return data_.data(); }
  [[nodiscard]] const float* ptr() const { return data_.data(); }

  float& operator[](std::size_t i) { return data_[i]; }
  float operator[](std::size_t i) const { return data_[i]; }

  float& at(int n, int c, int y, int x) { return data_[index(n, c, y, x)]; }
  [[nodiscard]] float at(int n, int c, int y, int x) const { return data_[index(n, c, y, x)]; }

  // Pointer to the start of plane (n, c).
  float* plane(int n, int c) { return data_.data() + plane_offset(n, c); }
  [[nodiscard]] const float* plane(int n, int c) const { return data_.data() + plane_offset(n, c); }

  // Single sample as an independent 1 x C x H x W tensor.
  [[nodiscard]] Tensor sample(int n) const;

  void fill(float v);
  [[nodiscard]] float item() const;

  [[nodiscard]] bool all_finite() const;

 private:
  [[nodiscard]] std::size_t plane_offset(int n, int c) const {
    return (static_cast<std::size_t>(n) * shape_.c + c) * shape_.plane();
  }
  [[nodiscard]] std::size_t index(int n, int c, int y, int x) const {
    return plane_offset(n, c) + static_cast<std::size_t>(y) * shape_.w + x;
  }

  Shape shape_{};
  std::vector<float> data_;
};

// Throws std::invalid_argument naming both shapes when they differ.
void require_same_shape(const Tensor& a, const Tensor& b, const char* what);

// Concatenate samples along the batch axis. All inputs must share C, H, W.
Tensor stack(std::span<const Tensor> samples);

}  // namespace rainfree
