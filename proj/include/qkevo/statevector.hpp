#pragma once

#include <cmath>
#include <complex>
#include <stdexcept>

#include <Eigen/Dense>

#include "qkevo/circuit.hpp"

namespace qkevo {

using Complex = std::complex<double>;
using Statevector = Eigen::VectorXcd;

// Qubit q is the q-th bit of the amplitude index, least significant first.
// Gate application works in place on the amplitude vector; every routine
// below is a unitary, so norms are preserved up to roundoff.

inline void apply_pauli_x(Statevector& psi, int target) {
    const Eigen::Index mask = Eigen::Index{1} << target;
    const Eigen::Index step = mask << 1;
    for (Eigen::Index base = 0; base < psi.size(); base += step)
        for (Eigen::Index i = base; i < base + mask; ++i) std::swap(psi[i], psi[i + mask]);
}

inline void apply_sqrt_x(Statevector& psi, int target) {
    static const Complex a{0.5, 0.5};   // (1+i)/2
    static const Complex b{0.5, -0.5};  // (1-i)/2
    const Eigen::Index mask = Eigen::Index{1} << target;
    const Eigen::Index step = mask << 1;
    for (Eigen::Index base = 0; base < psi.size(); base += step)
        for (Eigen::Index i = base; i < base + mask; ++i) {
            const Complex v0 = psi[i];
            const Complex v1 = psi[i + mask];
            psi[i] = a * v0 + b * v1;
            psi[i + mask] = b * v0 + a * v1;
        }
}

/// Rz(theta) = diag(e^{-i theta/2}, e^{+i theta/2}).
inline void apply_rz(Statevector& psi, int target, double theta) {
    const Complex e0 = std::polar(1.0, -0.5 * theta);
    const Complex e1 = std::polar(1.0, 0.5 * theta);
    const Eigen::Index mask = Eigen::Index{1} << target;
    for (Eigen::Index i = 0; i < psi.size(); ++i) psi[i] *= (i & mask) ? e1 : e0;
}

inline void apply_cx(Statevector& psi, int control, int target) {
    const Eigen::Index cmask = Eigen::Index{1} << control;
    const Eigen::Index tmask = Eigen::Index{1} << target;
    for (Eigen::Index i = 0; i < psi.size(); ++i)
        if ((i & cmask) && !(i & tmask)) std::swap(psi[i], psi[i | tmask]);
}

inline void apply_hadamard(Statevector& psi, int target) {
    static const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
    const Eigen::Index mask = Eigen::Index{1} << target;
    const Eigen::Index step = mask << 1;
    for (Eigen::Index base = 0; base < psi.size(); base += step)
        for (Eigen::Index i = base; i < base + mask; ++i) {
            const Complex v0 = psi[i];
            const Complex v1 = psi[i + mask];
            psi[i] = (v0 + v1) * inv_sqrt2;
            psi[i + mask] = (v0 - v1) * inv_sqrt2;
        }
}

inline void apply_gene(Statevector& psi, const Gene& g, const Eigen::VectorXd& features) {
    switch (g.kind) {
        case GateKind::PauliX: apply_pauli_x(psi, g.target); break;
        case GateKind::SqrtX: apply_sqrt_x(psi, g.target); break;
        case GateKind::Rz: apply_rz(psi, g.target, g.scale * features[g.feature]); break;
        case GateKind::Cx: apply_cx(psi, g.control, g.target); break;
    }
}

/// Map a feature vector to the pure state U(x)|0...0> by applying the
/// chromosome's gates in gene order.
inline Statevector encode(const Chromosome& c, const Eigen::VectorXd& features) {
    validate(c);
    for (const Gene& g : c.genes) {
        if (g.kind != GateKind::Rz) continue;
        if (g.feature >= features.size())
            throw std::invalid_argument("encode: feature index out of range");
        if (!std::isfinite(features[g.feature]))
            throw std::invalid_argument("encode: non-finite feature value");
    }
    Statevector psi = Statevector::Zero(Eigen::Index{1} << c.n_qubits);
    psi[0] = Complex{1.0, 0.0};
    for (const Gene& g : c.genes) apply_gene(psi, g, features);
    return psi;
}

}  // namespace qkevo
