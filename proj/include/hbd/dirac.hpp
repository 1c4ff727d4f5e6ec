/*
   Copyright 2026 The hbdlab Authors

   Licensed under the Apache License, Version 2.0 (the "License");
   you may not use this file except in compliance with the License.
   You may obtain a copy of the License at

       http://www.apache.org/licenses/LICENSE-2.0

   Unless required by applicable law or agreed to in writing, software
   distributed under the License is distributed on an "AS IS" BASIS,
   WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
   See the License for the specific language governing permissions and
   limitations under the License.
*/

#pragma once

#include <array>
#include <complex>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "hbd/foliation.hpp"

namespace hbd {

using Complex = std::complex<double>;
using Spinor = Eigen::Vector2cd;
using SpinorMatrix = Eigen::Matrix2cd;
using Covector = std::array<double, 2>;
using Vector2 = std::array<double, 2>;

// 2x2 Dirac matrices for metric diag(+1,-1).
struct DiracRep {
    SpinorMatrix gamma0;
    SpinorMatrix gamma1;

    // gamma0 = diag(1,-1), gamma1 = [[0,1],[-1,0]].
    static DiracRep standard();

    // S gamma S^-1; currents are unchanged when S is unitary and spinors map to S psi.
    DiracRep transformed(const SpinorMatrix& s) const;

    // gamma0 gamma^mu, the Hermitian kernel of the current bilinear.
    SpinorMatrix current_kernel(int mu) const;
};

// Positive-energy modes carry exp(-i(E x0 - k x1)) with spinor u(k); negative-energy
// modes carry exp(+i(E x0 + k x1)) with spinor v(k). Both have E = +sqrt(k^2 + m^2).
// With these conventions u(k) and v(k) are orthogonal, a u-mode has current
// velocity k/E and a v-mode has current velocity -k/E.
enum class EnergySign { Positive, Negative };

struct PlaneWaveMode {
    double k = 0.0;
    EnergySign sign = EnergySign::Positive;
    Complex amp{1.0, 0.0};
};

// Unit spinor with (gamma0 E - gamma1 k - m) u = 0. Throws DegenerateMode for k = m = 0.
Spinor spinor_u(double k, double m);
// Unit spinor with (gamma0 E + gamma1 k + m) v = 0. Throws DegenerateMode for k = m = 0.
Spinor spinor_v(double k, double m);

class SingleParticleWave {
public:
    SingleParticleWave(double mass, std::vector<PlaneWaveMode> modes);

    double mass() const { return mass_; }
    const std::vector<PlaneWaveMode>& modes() const { return modes_; }

    // Exact evaluation at any space-time point.
    Spinor operator()(const Event& e) const;

private:
    double mass_;
    std::vector<PlaneWaveMode> modes_;
    std::vector<double> energy_;     // signed: +E for u-modes, -E for v-modes
    std::vector<double> k_;
    std::vector<Complex> upper_;     // amp * spinor component 0
    std::vector<Complex> lower_;     // amp * spinor component 1
};

Spinor eval_single(const SingleParticleWave& w, const Event& e);

struct ProductTerm {
    Complex coeff{1.0, 0.0};
    std::vector<SingleParticleWave> factors;  // one per particle slot
};

// Sum of tensor products of single-particle solutions; solves the free
// multi-time Dirac system exactly. Spinor index of slot 0 is the most
// significant bit of the 2^N component index.
class MultiTimeWave {
public:
    MultiTimeWave(std::vector<double> masses, std::vector<ProductTerm> terms);

    static MultiTimeWave product(std::vector<SingleParticleWave> factors);

    int n_particles() const { return static_cast<int>(masses_.size()); }
    const std::vector<double>& masses() const { return masses_; }
    const std::vector<ProductTerm>& terms() const { return terms_; }

    Eigen::VectorXcd operator()(std::span<const Event> events) const;

private:
    std::vector<double> masses_;
    std::vector<ProductTerm> terms_;
};

Eigen::VectorXcd eval_multi(const MultiTimeWave& psi, std::span<const Event> events);

// Kronecker product of per-slot spinors, slot 0 outermost.
Eigen::VectorXcd tensor_product(std::span<const Spinor> spinors);

// Applies a 2x2 operator on one slot of an N-slot tensor, in place.
void apply_slot(Eigen::VectorXcd& psi, int n, int slot, const SpinorMatrix& op);

struct CurrentTensor {
    int n = 0;
    std::vector<double> components;  // index bits (mu_1 ... mu_N), mu_1 most significant
    double max_imag_residue = 0.0;

    double at(std::span<const int> mu) const;
    double operator[](std::size_t index) const { return components[index]; }
};

CurrentTensor current_tensor(const Eigen::VectorXcd& psi, int n,
                             const DiracRep& rep = DiracRep::standard());
CurrentTensor current_tensor(const MultiTimeWave& psi, std::span<const Event> events);

// j contracted with the given covectors in every slot except free_slot; returns
// the free-slot vector j_k^mu.
Vector2 slot_contraction(const Eigen::VectorXcd& psi, int n, int free_slot,
                         std::span<const Covector> covectors);

// j contracted with the given covectors in every slot.
double full_contraction(const Eigen::VectorXcd& psi, int n, std::span<const Covector> covectors);

// Norm of i gamma^mu d_mu psi - m psi, central differences with step h.
double dirac_residual(const SingleParticleWave& w, const Event& e, double h);

// Finite-difference divergence of j in the coordinates of one slot, one entry per
// setting of the remaining indices (same bit order as CurrentTensor).
std::vector<double> continuity_residual(const MultiTimeWave& psi, std::span<const Event> events,
                                        int slot, double h);

// Positive-energy modes on a uniform k grid over [k_center - k_window, k_center + k_window]
// with Gaussian weights of momentum spread `spread`, centred at x_center when x0 = 0.
// Amplitudes are scaled so that the state has unit norm over one spatial period.
SingleParticleWave gaussian_packet(double m, double k_center, double spread, int n_modes,
                                   double k_window, double x_center = 0.0);

} // namespace hbd
