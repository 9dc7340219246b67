#include "omicq/statevector.hpp"

#include <cmath>

#include "omicq/errors.hpp"
#include "omicq/tsv.hpp"

namespace omicq {

Statevector Statevector::zero_state(std::size_t n_qubits) {
  Statevector s;
  s.n_qubits = n_qubits;
  s.amplitudes.assign(std::size_t{1} << n_qubits, Complex{0.0, 0.0});
  s.amplitudes[0] = 1.0;
  return s;
}

double Statevector::norm() const {
  double ss = 0.0;
  for (const auto& a : amplitudes) ss += std::norm(a);
  return std::sqrt(ss);
}

Statevector amplitude_encode(std::span<const double> x) {
  if (x.empty()) throw ValidationError("cannot encode an empty vector");
  double ss = 0.0;
  for (double v : x) {
    if (!std::isfinite(v)) throw ValidationError("cannot encode a non-finite value");
    ss += v * v;
  }
  if (!(ss > 0.0)) throw ValidationError("cannot encode a zero vector");
  const double norm = std::sqrt(ss);
  std::size_t n = 0;
  while ((std::size_t{1} << n) < x.size()) ++n;
  Statevector s;
  s.n_qubits = n;
  s.amplitudes.assign(std::size_t{1} << n, Complex{0.0, 0.0});
  s.padded = s.amplitudes.size() - x.size();
  for (std::size_t i = 0; i < x.size(); ++i) s.amplitudes[i] = x[i] / norm;
  return s;
}

std::array<Complex, 4> rot_matrix(const RotParams& p) {
  const double c = std::cos(p.theta / 2.0);
  const double sn = std::sin(p.theta / 2.0);
  const Complex ep = std::polar(1.0, -(p.phi + p.lambda) / 2.0);
  const Complex em = std::polar(1.0, (p.phi - p.lambda) / 2.0);
  // Rz(l) Ry(t) Rz(f) with Rz(a) = diag(e^{-ia/2}, e^{ia/2}).
  return {ep * c, -em * sn, std::conj(em) * sn, std::conj(ep) * c};
}

namespace {

void check_qubit(const Statevector& s, std::size_t q) {
  if (q >= s.n_qubits) throw ValidationError("qubit " + std::to_string(q) + " out of range");
}

}  // namespace

void apply_rot(Statevector& s, std::size_t qubit, const RotParams& p) {
  check_qubit(s, qubit);
  const auto m = rot_matrix(p);
  const std::size_t stride = std::size_t{1} << (s.n_qubits - 1 - qubit);
  const std::size_t dim = s.amplitudes.size();
  for (std::size_t base = 0; base < dim; base += 2 * stride) {
    for (std::size_t i = base; i < base + stride; ++i) {
      const Complex a0 = s.amplitudes[i];
      const Complex a1 = s.amplitudes[i + stride];
      s.amplitudes[i] = m[0] * a0 + m[1] * a1;
      s.amplitudes[i + stride] = m[2] * a0 + m[3] * a1;
    }
  }
}

void apply_cz(Statevector& s, std::size_t q1, std::size_t q2) {
  check_qubit(s, q1);
  check_qubit(s, q2);
  if (q1 == q2) throw ValidationError("CZ needs two distinct qubits");
  const std::size_t mask = (std::size_t{1} << (s.n_qubits - 1 - q1)) | (std::size_t{1} << (s.n_qubits - 1 - q2));
  for (std::size_t i = 0; i < s.amplitudes.size(); ++i)
    if ((i & mask) == mask) s.amplitudes[i] = -s.amplitudes[i];
}

void apply_ansatz_layer(Statevector& s, std::span<const RotParams> params) {
  if (params.size() != s.n_qubits)
    throw ValidationError("ansatz layer needs " + std::to_string(s.n_qubits) + " rotations, got " +
                          std::to_string(params.size()));
  for (std::size_t q = 0; q < s.n_qubits; ++q) apply_rot(s, q, params[q]);
  for (std::size_t q = 0; q + 1 < s.n_qubits; ++q) apply_cz(s, q, q + 1);
}

double expval_z(const Statevector& s, std::size_t qubit) {
  check_qubit(s, qubit);
  const std::size_t bit = std::size_t{1} << (s.n_qubits - 1 - qubit);
  double e = 0.0;
  for (std::size_t i = 0; i < s.amplitudes.size(); ++i) e += (i & bit) ? -std::norm(s.amplitudes[i]) : std::norm(s.amplitudes[i]);
  return e;
}

std::vector<double> expval_z_all(const Statevector& s) {
  std::vector<double> out(s.n_qubits, 0.0);
  for (std::size_t i = 0; i < s.amplitudes.size(); ++i) {
    const double p = std::norm(s.amplitudes[i]);
    for (std::size_t q = 0; q < s.n_qubits; ++q) out[q] += (i >> (s.n_qubits - 1 - q)) & 1 ? -p : p;
  }
  return out;
}

std::string format_statevector(const Statevector& s) {
  std::string out = "index\tre\tim\n";
  for (std::size_t i = 0; i < s.amplitudes.size(); ++i)
    out += std::to_string(i) + "\t" + format_double(s.amplitudes[i].real()) + "\t" +
           format_double(s.amplitudes[i].imag()) + "\n";
  return out;
}

}  // namespace omicq
