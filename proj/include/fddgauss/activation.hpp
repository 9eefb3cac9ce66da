#pragma once

#include <cmath>
#include <string>
#include <string_view>

namespace fddgauss {

enum class ActivationKind { relu, tanh, identity, leaky_relu };

std::string_view to_string(ActivationKind kind);
ActivationKind activation_kind_from_string(std::string_view name);

// A Lipschitz activation. The bound formulas only see it through lip() and
// sigma0(); kinks (if any) are at the origin, which the quadrature relies on.
class ActivationSpec {
 public:
  ActivationSpec() = default;
  explicit ActivationSpec(ActivationKind kind, double slope = 0.01);

  static ActivationSpec relu() { return ActivationSpec(ActivationKind::relu); }
  static ActivationSpec tanh() { return ActivationSpec(ActivationKind::tanh); }
  static ActivationSpec identity() { return ActivationSpec(ActivationKind::identity); }
  static ActivationSpec leaky_relu(double slope) { return ActivationSpec(ActivationKind::leaky_relu, slope); }

  double operator()(double x) const {
    switch (kind_) {
      case ActivationKind::relu: return x > 0.0 ? x : 0.0;
      case ActivationKind::tanh: return std::tanh(x);
      case ActivationKind::identity: return x;
      case ActivationKind::leaky_relu: return x > 0.0 ? x : slope_ * x;
    }
    return x;
  }

  ActivationKind kind() const { return kind_; }
  double slope() const { return slope_; }
  double lip() const;
  double sigma0() const { return 0.0; }
  // Positively homogeneous of degree one: sigma(t x) = t sigma(x) for t >= 0.
  bool homogeneous() const { return kind_ != ActivationKind::tanh; }
  std::string label() const;

 private:
  ActivationKind kind_ = ActivationKind::relu;
  double slope_ = 0.0;
};

}  // namespace fddgauss
