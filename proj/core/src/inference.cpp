#include "rainfree/inference.hpp"

#include <algorithm>
#include <stdexcept>

namespace rainfree {
namespace {

int mirror(int i, int n) {
  if (n == 1) return 0;
  const int period = 2 * (n - 1);
  i %= period;
  if (i < 0) i += period;
  return i < n ? i : period - i;
}

}  // namespace

ImageTensor pad_to_multiple(const ImageTensor& img, int multiple) {
  if (multiple < 1) throw std::invalid_argument("pad multiple must be positive");
  const int h = (img.h() + multiple - 1) / multiple * multiple;
  const int w = (img.w() + multiple - 1) / multiple * multiple;
  if (h == img.h() && w == img.w()) return img;
  Tensor out({img.n(), img.c(), h, w});
  for (int n = 0; n < img.n(); ++n) {
    for (int c = 0; c < img.c(); ++c) {
      for (int y = 0; y < h; ++y) {
        const int sy = mirror(y, img.h());
        for (int x = 0; x < w; ++x) out.at(n, c, y, x) = img.at(n, c, sy, mirror(x, img.w()));
      }
    }
  }
  return out;
}

ImageTensor crop_top_left(const ImageTensor& img, int height, int width) {
  if (height > img.h() || width > img.w() || height < 1 || width < 1) {
    throw std::invalid_argument("crop window outside image " + img.shape().str());
  }
  Tensor out({img.n(), img.c(), height, width});
  for (int n = 0; n < img.n(); ++n) {
    for (int c = 0; c < img.c(); ++c) {
      for (int y = 0; y < height; ++y) {
        std::copy_n(img.plane(n, c) + static_cast<std::size_t>(y) * img.w(), width, &out.at(n, c, y, 0));
      }
    }
  }
  return out;
}

ImageTensor derain_image(Generator& g_c, const ImageTensor& rainy) {
  require_image(rainy, "derain_image");
  const ImageTensor padded = pad_to_multiple(rainy, 4);
  return crop_top_left(g_c.infer(padded), rainy.h(), rainy.w());
}

}  // namespace rainfree
