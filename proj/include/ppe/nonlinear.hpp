#pragma once

#include <span>

#include "ppe/field.hpp"

namespace ppe {

/// Reference mean power of a normalized field.
inline constexpr double kReferencePower = 1.0;

/// Single-polarization RP1 operator: (|a|^2 - 2P) a, element-wise.
ComplexField nl_operator_single(const ComplexField& field);

/// Manakov RP1 operator: (|a_x|^2 + |a_y|^2 - 3/2 P) a_{x/y}, element-wise.
DualPolField nl_operator_dual(const DualPolField& field);

// Raw kernels used by the perturbation-matrix builder.
void nl_single_inplace(std::span<cplx> a);
void nl_dual_inplace(std::span<cplx> ax, std::span<cplx> ay);

}  // namespace ppe
