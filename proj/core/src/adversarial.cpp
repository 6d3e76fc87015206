#include "rainfree/adversarial.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace rainfree::adversarial {

double softplus(double x) {
  return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

void require_finite_logits(const Tensor& logits, const char* what) {
  if (logits.empty()) throw std::invalid_argument(std::string(what) + ": empty logit map");
  if (!logits.all_finite()) {
    throw std::domain_error(std::string(what) + ": non-finite logits");
  }
}

namespace {

double mean_softplus(const Tensor& z, double sign) {
  double acc = 0.0;
  for (float v : z.data()) acc += softplus(sign * v);
  return acc / static_cast<double>(z.size());
}

// d/dz mean softplus(sign * z) = sign * sigmoid(sign * z) / n.
Tensor mean_softplus_grad(const Tensor& z, double sign) {
  Tensor g(z.shape());
  const double inv = 1.0 / static_cast<double>(z.size());
  for (std::size_t i = 0; i < z.size(); ++i) {
    g[i] = static_cast<float>(sign * sigmoid(sign * z[i]) * inv);
  }
  return g;
}

}  // namespace

double real_term(const Tensor& logits) { return mean_softplus(logits, -1.0); }
double fake_term(const Tensor& logits) { return mean_softplus(logits, 1.0); }
Tensor real_term_grad(const Tensor& logits) { return mean_softplus_grad(logits, -1.0); }
Tensor fake_term_grad(const Tensor& logits) { return mean_softplus_grad(logits, 1.0); }

}  // namespace rainfree::adversarial
