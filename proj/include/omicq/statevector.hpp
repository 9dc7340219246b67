#pragma once

#include <array>
#include <complex>
#include <span>
#include <string>
#include <vector>

namespace omicq {

using Complex = std::complex<double>;

// Basis index convention: qubit 0 is the most significant bit.
struct Statevector {
  std::size_t n_qubits = 0;
  std::vector<Complex> amplitudes;
  std::size_t padded = 0;  // zeros appended by amplitude_encode

  static Statevector zero_state(std::size_t n_qubits);
  double norm() const;
};

struct RotParams {
  double theta = 0.0;
  double phi = 0.0;
  double lambda = 0.0;
};

Statevector amplitude_encode(std::span<const double> x);

// Rz(lambda) Ry(theta) Rz(phi), applied in place.
void apply_rot(Statevector& s, std::size_t qubit, const RotParams& p);
void apply_cz(Statevector& s, std::size_t q1, std::size_t q2);
// Rot on every qubit, then CZ(0,1), CZ(1,2), ...
void apply_ansatz_layer(Statevector& s, std::span<const RotParams> params);

double expval_z(const Statevector& s, std::size_t qubit);
std::vector<double> expval_z_all(const Statevector& s);

// 2x2 matrix of Rot, row-major.
std::array<Complex, 4> rot_matrix(const RotParams& p);

std::string format_statevector(const Statevector& s);

}  // namespace omicq
