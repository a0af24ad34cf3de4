#pragma once

#include <complex>
#include <cstdint>
#include <random>
#include <vector>

#include <Eigen/Dense>

namespace crbeam {

using Complex = std::complex<double>;
using ComplexVec = Eigen::VectorXcd;
using HermitianMat = Eigen::MatrixXcd;

/// Euclidean ball around a nominal channel vector together with the
/// Frobenius-norm ball it induces on the lifted rank-one perturbation
/// h a' + a h' + a a'.
struct UncertaintyBall {
  double vector_radius = 0.0;  // delta, bound on ||a||
  double matrix_radius = 0.0;  // eps, bound on ||Delta||_F

  static UncertaintyBall from_vector_radius(double delta, const ComplexVec& nominal);
  static UncertaintyBall from_matrix_radius(double eps, const ComplexVec& nominal);
};

/// Full problem instance for the downlink CR-Net design: dimensions,
/// nominal channels, uncertainty radii, thresholds and noise power.
struct ScenarioConfig {
  int n_antennas = 0;
  double noise_power = 0.0;                     // sigma_n^2
  std::vector<ComplexVec> su_channels;          // nominal SU channels, length K
  std::vector<ComplexVec> pu_channels;          // nominal PU channels, length L
  std::vector<UncertaintyBall> su_uncertainty;  // per SU
  std::vector<UncertaintyBall> pu_uncertainty;  // per PU
  std::vector<double> sinr_thresholds;          // gamma_k, linear scale
  std::vector<double> ip_thresholds;            // kappa_l, linear power units

  // Directions the channels were synthesized from, when known (degrees).
  // Empty when channels were given explicitly.
  std::vector<double> su_angles_deg;
  std::vector<double> pu_angles_deg;

  int num_su() const { return static_cast<int>(su_channels.size()); }
  int num_pu() const { return static_cast<int>(pu_channels.size()); }

  /// Throws std::invalid_argument on any violated invariant
  /// (K >= 1, matching lengths, positive thresholds, ...).
  void validate() const;
};

/// Half-wavelength ULA steering vector toward theta (degrees off boreside):
/// entry i is exp(j*pi*(i-1)*cos(theta)), i = 1..N. ||result|| = sqrt(N).
ComplexVec ula_steering(double theta_degrees, int n_antennas);

/// eps = delta^2 + 2*delta*||nominal||.
double lift_radius(double vector_radius, const ComplexVec& nominal);

/// Inverse of lift_radius: the unique delta >= 0 with
/// delta^2 + 2*delta*||nominal|| = eps, i.e. -||h|| + sqrt(||h||^2 + eps).
double unlift_radius(double matrix_radius, const ComplexVec& nominal);

struct PerturbationOptions {
  // Fraction of draws pinned to the ball surface; worst cases live there,
  // uniform-in-ball draws rarely approach them in high dimension.
  double boundary_fraction = 0.5;
};

/// Draws a complex vector a with ||a|| <= vector_radius, mixing
/// interior-uniform and boundary draws per opts.
ComplexVec sample_perturbation(double vector_radius, int dim, std::mt19937_64& rng,
                               const PerturbationOptions& opts = {});
ComplexVec sample_perturbation(double vector_radius, int dim, std::uint64_t seed,
                               const PerturbationOptions& opts = {});

/// v v', Hermitian PSD of rank <= 1, trace = ||v||^2.
HermitianMat outer_product(const ComplexVec& v);

/// Power-ratio dB conversions: linear = 10^(db/10).
double db_to_linear(double db);
double linear_to_db(double linear);

/// Deterministic seed derivation for independent substreams.
std::uint64_t splitmix64(std::uint64_t z);
std::uint64_t seed_mix(std::uint64_t a, std::uint64_t b);

}  // namespace crbeam
