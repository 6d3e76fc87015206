#pragma once

#include "rainfree/image.hpp"
#include "rainfree/networks.hpp"

namespace rainfree {

// Mirror-pads bottom and right edges so both sides become multiples of `multiple`.
ImageTensor pad_to_multiple(const ImageTensor& img, int multiple);

// Top-left height x width window.
ImageTensor crop_top_left(const ImageTensor& img, int height, int width);

// G_c on an arbitrary-size image: pad to a multiple of 4, run, crop back.
ImageTensor derain_image(Generator& g_c, const ImageTensor& rainy);

}  // namespace rainfree
