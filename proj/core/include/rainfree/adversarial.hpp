#pragma once

#include "rainfree/tensor.hpp"

// Logit-space binary cross-entropy pieces shared by the rain guidance and the
// luminance-adjusting adversarial objectives.
namespace rainfree::adversarial {

// log(1 + exp(x)) without overflow.
double softplus(double x);
double sigmoid(double x);

// Throws std::domain_error naming `what` if any logit is NaN or infinite.
void require_finite_logits(const Tensor& logits, const char* what);

// -log sigma(z) averaged over the map, i.e. mean softplus(-z): label "real".
double real_term(const Tensor& logits);
// -log(1 - sigma(z)) averaged over the map, i.e. mean softplus(z): label "fake".
double fake_term(const Tensor& logits);

Tensor real_term_grad(const Tensor& logits);
Tensor fake_term_grad(const Tensor& logits);

}  // namespace rainfree::adversarial
