#include "crbeam/model.hpp"

#include <cmath>
#include <stdexcept>

namespace crbeam {

namespace {

constexpr double kPi = 3.14159265358979323846;

double uniform01(std::mt19937_64& rng) {
  // 53-bit mantissa draw; identical across standard library implementations.
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

double standard_normal(std::mt19937_64& rng) {
  // Box-Muller; avoids the implementation-defined std::normal_distribution.
  double u1 = uniform01(rng);
  double u2 = uniform01(rng);
  while (u1 <= 1e-300) u1 = uniform01(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * kPi * u2);
}

}  // namespace

UncertaintyBall UncertaintyBall::from_vector_radius(double delta, const ComplexVec& nominal) {
  if (delta < 0.0) throw std::invalid_argument("uncertainty radius must be nonnegative");
  return {delta, lift_radius(delta, nominal)};
}

UncertaintyBall UncertaintyBall::from_matrix_radius(double eps, const ComplexVec& nominal) {
  if (eps < 0.0) throw std::invalid_argument("uncertainty radius must be nonnegative");
  return {unlift_radius(eps, nominal), eps};
}

void ScenarioConfig::validate() const {
  if (n_antennas < 1) throw std::invalid_argument("scenario: n_antennas must be >= 1");
  if (noise_power <= 0.0) throw std::invalid_argument("scenario: noise_power must be > 0");
  const auto k = su_channels.size();
  const auto l = pu_channels.size();
  if (k < 1) throw std::invalid_argument("scenario: at least one SU required");
  if (su_uncertainty.size() != k || sinr_thresholds.size() != k)
    throw std::invalid_argument("scenario: SU field lengths disagree");
  if (pu_uncertainty.size() != l || ip_thresholds.size() != l)
    throw std::invalid_argument("scenario: PU field lengths disagree");
  for (const auto& h : su_channels)
    if (h.size() != n_antennas) throw std::invalid_argument("scenario: SU channel length != n_antennas");
  for (const auto& g : pu_channels)
    if (g.size() != n_antennas) throw std::invalid_argument("scenario: PU channel length != n_antennas");
  for (double g : sinr_thresholds)
    if (!(g > 0.0)) throw std::invalid_argument("scenario: SINR thresholds must be > 0");
  for (double kp : ip_thresholds)
    if (!(kp > 0.0)) throw std::invalid_argument("scenario: IP thresholds must be > 0");
  for (const auto& u : su_uncertainty)
    if (u.vector_radius < 0.0 || u.matrix_radius < 0.0)
      throw std::invalid_argument("scenario: SU radii must be nonnegative");
  for (const auto& u : pu_uncertainty)
    if (u.vector_radius < 0.0 || u.matrix_radius < 0.0)
      throw std::invalid_argument("scenario: PU radii must be nonnegative");
  if (!su_angles_deg.empty() && su_angles_deg.size() != k)
    throw std::invalid_argument("scenario: su_angles_deg length != K");
  if (!pu_angles_deg.empty() && pu_angles_deg.size() != l)
    throw std::invalid_argument("scenario: pu_angles_deg length != L");
}

ComplexVec ula_steering(double theta_degrees, int n_antennas) {
  if (n_antennas < 1) throw std::invalid_argument("ula_steering: n_antennas must be >= 1");
  if (!std::isfinite(theta_degrees)) throw std::invalid_argument("ula_steering: theta must be finite");
  const double c = std::cos(theta_degrees * kPi / 180.0);
  ComplexVec h(n_antennas);
  for (int i = 0; i < n_antennas; ++i) {
    const double phase = kPi * i * c;
    h(i) = Complex(std::cos(phase), std::sin(phase));
  }
  return h;
}

double lift_radius(double vector_radius, const ComplexVec& nominal) {
  if (vector_radius < 0.0) throw std::invalid_argument("lift_radius: radius must be nonnegative");
  return vector_radius * vector_radius + 2.0 * vector_radius * nominal.norm();
}

double unlift_radius(double matrix_radius, const ComplexVec& nominal) {
  if (matrix_radius < 0.0) throw std::invalid_argument("unlift_radius: radius must be nonnegative");
  const double n = nominal.norm();
  // Stable quadratic root: eps / (||h|| + sqrt(||h||^2 + eps)) avoids
  // cancellation of -||h|| + sqrt(||h||^2 + eps) for small eps.
  const double root = std::sqrt(n * n + matrix_radius);
  return matrix_radius / (n + root);
}

ComplexVec sample_perturbation(double vector_radius, int dim, std::mt19937_64& rng,
                               const PerturbationOptions& opts) {
  if (vector_radius < 0.0) throw std::invalid_argument("sample_perturbation: radius must be nonnegative");
  if (dim < 1) throw std::invalid_argument("sample_perturbation: dim must be >= 1");
  ComplexVec a = ComplexVec::Zero(dim);
  if (vector_radius == 0.0) return a;
  for (int i = 0; i < dim; ++i) {
    const double re = standard_normal(rng);
    const double im = standard_normal(rng);
    a(i) = Complex(re, im);
  }
  const double n = a.norm();
  if (n == 0.0) return a;
  double r = vector_radius;
  const bool boundary = uniform01(rng) < opts.boundary_fraction;
  if (!boundary) {
    // Uniform in the ball: radius ~ delta * U^(1/d), d = 2*dim real dimensions.
    r = vector_radius * std::pow(uniform01(rng), 1.0 / (2.0 * dim));
  }
  // Deflate by a few ulps so rounding never lands outside the ball.
  a *= (r / n) * (1.0 - 4e-16);
  return a;
}

ComplexVec sample_perturbation(double vector_radius, int dim, std::uint64_t seed,
                               const PerturbationOptions& opts) {
  std::mt19937_64 rng(seed);
  return sample_perturbation(vector_radius, dim, rng, opts);
}

HermitianMat outer_product(const ComplexVec& v) {
  return v * v.adjoint();
}

double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

double linear_to_db(double linear) { return 10.0 * std::log10(linear); }

std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::uint64_t seed_mix(std::uint64_t a, std::uint64_t b) {
  return splitmix64(splitmix64(a) ^ (b + 0x9e3779b97f4a7c15ULL));
}

}  // namespace crbeam
