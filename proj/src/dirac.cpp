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

#include "hbd/dirac.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "hbd/error.hpp"

namespace hbd {

namespace {

const SpinorMatrix& kernel0()
{
    static const SpinorMatrix k = DiracRep::standard().current_kernel(0);
    return k;
}

const SpinorMatrix& kernel1()
{
    static const SpinorMatrix k = DiracRep::standard().current_kernel(1);
    return k;
}

SpinorMatrix covector_operator(const Covector& m)
{
    return m[0] * kernel0() + m[1] * kernel1();
}

inline void sin_cos(double phase, double& s, double& c)
{
#if defined(__GLIBC__)
    ::sincos(phase, &s, &c);
#else
    s = std::sin(phase);
    c = std::cos(phase);
#endif
}

std::size_t pow2(int n) { return std::size_t{1} << n; }

// Inserts `bit` at slot position of an (n-1)-bit index of the remaining slots.
std::size_t insert_bit(std::size_t rest, int n, int slot, std::size_t bit)
{
    const int shift = n - 1 - slot;
    const std::size_t low = rest & ((std::size_t{1} << shift) - 1);
    const std::size_t high = rest >> shift;
    return (high << (shift + 1)) | (bit << shift) | low;
}

} // namespace

DiracRep DiracRep::standard()
{
    DiracRep rep;
    rep.gamma0 << 1.0, 0.0, 0.0, -1.0;
    rep.gamma1 << 0.0, 1.0, -1.0, 0.0;
    return rep;
}

DiracRep DiracRep::transformed(const SpinorMatrix& s) const
{
    const SpinorMatrix inv = s.inverse();
    return {s * gamma0 * inv, s * gamma1 * inv};
}

SpinorMatrix DiracRep::current_kernel(int mu) const
{
    return mu == 0 ? SpinorMatrix(gamma0 * gamma0) : SpinorMatrix(gamma0 * gamma1);
}

Spinor spinor_u(double k, double m)
{
    if (m < 0.0) throw std::invalid_argument("spinor_u: negative mass");
    if (k == 0.0 && m == 0.0) throw DegenerateMode("spinor_u: k = m = 0 has no direction");
    const double e = std::hypot(k, m);
    const double norm = std::sqrt(2.0 * e * (e + m));
    return Spinor((e + m) / norm, k / norm);
}

Spinor spinor_v(double k, double m)
{
    if (m < 0.0) throw std::invalid_argument("spinor_v: negative mass");
    if (k == 0.0 && m == 0.0) throw DegenerateMode("spinor_v: k = m = 0 has no direction");
    const double e = std::hypot(k, m);
    const double norm = std::sqrt(2.0 * e * (e + m));
    return Spinor(-k / norm, (e + m) / norm);
}

SingleParticleWave::SingleParticleWave(double mass, std::vector<PlaneWaveMode> modes)
    : mass_(mass), modes_(std::move(modes))
{
    if (mass_ < 0.0) throw std::invalid_argument("SingleParticleWave: negative mass");
    if (modes_.empty()) throw std::invalid_argument("SingleParticleWave: empty mode list");
    energy_.reserve(modes_.size());
    k_.reserve(modes_.size());
    upper_.reserve(modes_.size());
    lower_.reserve(modes_.size());
    for (const auto& mode : modes_) {
        const double e = std::hypot(mode.k, mass_);
        const bool positive = mode.sign == EnergySign::Positive;
        const Spinor s = positive ? spinor_u(mode.k, mass_) : spinor_v(mode.k, mass_);
        energy_.push_back(positive ? e : -e);
        k_.push_back(mode.k);
        upper_.push_back(mode.amp * s(0));
        lower_.push_back(mode.amp * s(1));
    }
}

Spinor SingleParticleWave::operator()(const Event& e) const
{
    double re0 = 0.0, im0 = 0.0, re1 = 0.0, im1 = 0.0;
    const std::size_t n = k_.size();
    for (std::size_t j = 0; j < n; ++j) {
        double s, c;
        sin_cos(k_[j] * e.x1 - energy_[j] * e.x0, s, c);
        const Complex& a = upper_[j];
        const Complex& b = lower_[j];
        re0 += a.real() * c - a.imag() * s;
        im0 += a.real() * s + a.imag() * c;
        re1 += b.real() * c - b.imag() * s;
        im1 += b.real() * s + b.imag() * c;
    }
    return Spinor(Complex(re0, im0), Complex(re1, im1));
}

Spinor eval_single(const SingleParticleWave& w, const Event& e) { return w(e); }

MultiTimeWave::MultiTimeWave(std::vector<double> masses, std::vector<ProductTerm> terms)
    : masses_(std::move(masses)), terms_(std::move(terms))
{
    if (masses_.empty()) throw std::invalid_argument("MultiTimeWave: need at least one particle");
    if (terms_.empty()) throw std::invalid_argument("MultiTimeWave: need at least one term");
    for (const auto& term : terms_) {
        if (term.factors.size() != masses_.size())
            throw std::invalid_argument("MultiTimeWave: every term needs one factor per particle");
        for (std::size_t j = 0; j < masses_.size(); ++j)
            if (term.factors[j].mass() != masses_[j])
                throw std::invalid_argument("MultiTimeWave: factor " + std::to_string(j) +
                                            " has the wrong mass");
    }
}

MultiTimeWave MultiTimeWave::product(std::vector<SingleParticleWave> factors)
{
    std::vector<double> masses;
    for (const auto& f : factors) masses.push_back(f.mass());
    return MultiTimeWave(std::move(masses), {ProductTerm{Complex(1.0, 0.0), std::move(factors)}});
}

Eigen::VectorXcd tensor_product(std::span<const Spinor> spinors)
{
    Eigen::VectorXcd out = Eigen::VectorXcd::Ones(1);
    for (const auto& s : spinors) {
        Eigen::VectorXcd next(out.size() * 2);
        for (Eigen::Index i = 0; i < out.size(); ++i) {
            next(2 * i) = out(i) * s(0);
            next(2 * i + 1) = out(i) * s(1);
        }
        out = std::move(next);
    }
    return out;
}

Eigen::VectorXcd MultiTimeWave::operator()(std::span<const Event> events) const
{
    const int n = n_particles();
    if (static_cast<int>(events.size()) != n)
        throw ArityMismatch("eval_multi: expected " + std::to_string(n) + " events, got " +
                            std::to_string(events.size()));
    Eigen::VectorXcd psi = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(pow2(n)));
    std::vector<Spinor> slots(static_cast<std::size_t>(n));
    for (const auto& term : terms_) {
        for (int j = 0; j < n; ++j) slots[j] = term.factors[j](events[j]);
        psi += term.coeff * tensor_product(slots);
    }
    return psi;
}

Eigen::VectorXcd eval_multi(const MultiTimeWave& psi, std::span<const Event> events)
{
    return psi(events);
}

void apply_slot(Eigen::VectorXcd& psi, int n, int slot, const SpinorMatrix& op)
{
    const std::size_t stride = std::size_t{1} << (n - 1 - slot);
    const std::size_t size = pow2(n);
    for (std::size_t i = 0; i < size; ++i) {
        if (i & stride) continue;
        const Complex a = psi(static_cast<Eigen::Index>(i));
        const Complex b = psi(static_cast<Eigen::Index>(i + stride));
        psi(static_cast<Eigen::Index>(i)) = op(0, 0) * a + op(0, 1) * b;
        psi(static_cast<Eigen::Index>(i + stride)) = op(1, 0) * a + op(1, 1) * b;
    }
}

double CurrentTensor::at(std::span<const int> mu) const
{
    std::size_t index = 0;
    for (int m : mu) index = (index << 1) | static_cast<std::size_t>(m);
    return components.at(index);
}

CurrentTensor current_tensor(const Eigen::VectorXcd& psi, int n, const DiracRep& rep)
{
    CurrentTensor j;
    j.n = n;
    const std::size_t size = pow2(n);
    j.components.resize(size);
    const SpinorMatrix k0 = rep.current_kernel(0);
    const SpinorMatrix k1 = rep.current_kernel(1);
    for (std::size_t index = 0; index < size; ++index) {
        Eigen::VectorXcd phi = psi;
        for (int slot = 0; slot < n; ++slot) {
            const bool one = (index >> (n - 1 - slot)) & 1U;
            apply_slot(phi, n, slot, one ? k1 : k0);
        }
        const Complex value = psi.dot(phi);  // conjugates psi
        j.components[index] = value.real();
        j.max_imag_residue = std::max(j.max_imag_residue, std::abs(value.imag()));
    }
    return j;
}

CurrentTensor current_tensor(const MultiTimeWave& psi, std::span<const Event> events)
{
    return current_tensor(psi(events), psi.n_particles());
}

Vector2 slot_contraction(const Eigen::VectorXcd& psi, int n, int free_slot,
                         std::span<const Covector> covectors)
{
    Eigen::VectorXcd base = psi;
    for (int slot = 0; slot < n; ++slot)
        if (slot != free_slot) apply_slot(base, n, slot, covector_operator(covectors[slot]));
    Eigen::VectorXcd one = base;
    apply_slot(one, n, free_slot, kernel1());
    // kernel0 is the identity in the standard representation
    return {psi.dot(base).real(), psi.dot(one).real()};
}

double full_contraction(const Eigen::VectorXcd& psi, int n, std::span<const Covector> covectors)
{
    Eigen::VectorXcd phi = psi;
    for (int slot = 0; slot < n; ++slot) apply_slot(phi, n, slot, covector_operator(covectors[slot]));
    return psi.dot(phi).real();
}

double dirac_residual(const SingleParticleWave& w, const Event& e, double h)
{
    const DiracRep rep = DiracRep::standard();
    const Spinor d0 = (w({e.x0 + h, e.x1}) - w({e.x0 - h, e.x1})) / (2.0 * h);
    const Spinor d1 = (w({e.x0, e.x1 + h}) - w({e.x0, e.x1 - h})) / (2.0 * h);
    const Complex i(0.0, 1.0);
    const Spinor r = i * (rep.gamma0 * d0) + i * (rep.gamma1 * d1) - w.mass() * w(e);
    return r.norm();
}

std::vector<double> continuity_residual(const MultiTimeWave& psi, std::span<const Event> events,
                                        int slot, double h)
{
    const int n = psi.n_particles();
    if (static_cast<int>(events.size()) != n)
        throw ArityMismatch("continuity_residual: wrong number of events");
    if (slot < 0 || slot >= n) throw std::out_of_range("continuity_residual: slot out of range");

    std::vector<Event> shifted(events.begin(), events.end());
    auto current_at = [&](double d0, double d1) {
        shifted[slot] = {events[slot].x0 + d0, events[slot].x1 + d1};
        return current_tensor(psi, shifted);
    };
    const CurrentTensor tp = current_at(h, 0.0);
    const CurrentTensor tm = current_at(-h, 0.0);
    const CurrentTensor xp = current_at(0.0, h);
    const CurrentTensor xm = current_at(0.0, -h);

    std::vector<double> out(pow2(n - 1));
    for (std::size_t rest = 0; rest < out.size(); ++rest) {
        const std::size_t i0 = insert_bit(rest, n, slot, 0);
        const std::size_t i1 = insert_bit(rest, n, slot, 1);
        out[rest] = (tp[i0] - tm[i0]) / (2.0 * h) + (xp[i1] - xm[i1]) / (2.0 * h);
    }
    return out;
}

SingleParticleWave gaussian_packet(double m, double k_center, double spread, int n_modes,
                                   double k_window, double x_center)
{
    if (n_modes < 8)
        throw BadQuadrature("gaussian_packet: need at least 8 modes, got " + std::to_string(n_modes));
    if (!(spread > 0.0) || !(k_window > 0.0))
        throw std::invalid_argument("gaussian_packet: spread and k_window must be positive");
    const double dk = 2.0 * k_window / (n_modes - 1);
    std::vector<PlaneWaveMode> modes;
    modes.reserve(static_cast<std::size_t>(n_modes));
    double sum = 0.0;
    for (int j = 0; j < n_modes; ++j) {
        const double k = k_center - k_window + dk * j;
        const double weight = std::exp(-(k - k_center) * (k - k_center) / (4.0 * spread * spread));
        sum += weight * weight;
        modes.push_back({k, EnergySign::Positive, std::polar(weight, -k * x_center)});
    }
    // Over one period 2 pi / dk the modes are orthogonal: norm^2 = (2 pi / dk) sum |amp|^2.
    const double scale = std::sqrt(dk / (2.0 * std::numbers::pi * sum));
    for (auto& mode : modes) mode.amp *= scale;
    return SingleParticleWave(m, std::move(modes));
}

} // namespace hbd
