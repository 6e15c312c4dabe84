#include "ppe/nonlinear.hpp"

#include <stdexcept>

namespace ppe {

void nl_single_inplace(std::span<cplx> a) {
  for (auto& v : a) v *= std::norm(v) - 2.0 * kReferencePower;
}

void nl_dual_inplace(std::span<cplx> ax, std::span<cplx> ay) {
  if (ax.size() != ay.size()) throw std::invalid_argument("dual-pol rails differ in length");
  for (std::size_t n = 0; n < ax.size(); ++n) {
    const double w = std::norm(ax[n]) + std::norm(ay[n]) - 1.5 * kReferencePower;
    ax[n] *= w;
    ay[n] *= w;
  }
}

ComplexField nl_operator_single(const ComplexField& field) {
  Samples s(field.data());
  nl_single_inplace(s);
  return field.with_samples(std::move(s));
}

DualPolField nl_operator_dual(const DualPolField& field) {
  Samples x(field.x().data());
  Samples y(field.y().data());
  nl_dual_inplace(x, y);
  return DualPolField(field.x().with_samples(std::move(x)), field.y().with_samples(std::move(y)));
}

}  // namespace ppe
