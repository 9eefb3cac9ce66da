#include "fddgauss/activation.hpp"

#include <algorithm>
#include <sstream>

#include "fddgauss/errors.hpp"

namespace fddgauss {

std::string_view to_string(ActivationKind kind) {
  switch (kind) {
    case ActivationKind::relu: return "relu";
    case ActivationKind::tanh: return "tanh";
    case ActivationKind::identity: return "identity";
    case ActivationKind::leaky_relu: return "leaky_relu";
  }
  return "unknown";
}

ActivationKind activation_kind_from_string(std::string_view name) {
  if (name == "relu") return ActivationKind::relu;
  if (name == "tanh") return ActivationKind::tanh;
  if (name == "identity") return ActivationKind::identity;
  if (name == "leaky_relu") return ActivationKind::leaky_relu;
  throw InvalidArgument("unknown activation '" + std::string(name) + "'");
}

ActivationSpec::ActivationSpec(ActivationKind kind, double slope)
    : kind_(kind), slope_(kind == ActivationKind::leaky_relu ? slope : 0.0) {
  if (kind == ActivationKind::leaky_relu && !std::isfinite(slope)) {
    throw InvalidArgument("leaky_relu slope must be finite");
  }
}

double ActivationSpec::lip() const {
  if (kind_ == ActivationKind::leaky_relu) return std::max(1.0, std::abs(slope_));
  return 1.0;
}

std::string ActivationSpec::label() const {
  if (kind_ != ActivationKind::leaky_relu) return std::string(to_string(kind_));
  std::ostringstream out;
  out << "leaky_relu(" << slope_ << ")";
  return out.str();
}

}  // namespace fddgauss
