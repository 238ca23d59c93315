#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "polariton/exact.hpp"
#include "polariton/model.hpp"

namespace polariton::spectra {

enum class Channel { photon, exciton, response, absorption, photoluminescence };
std::string to_string(Channel channel);
Channel channel_from_string(const std::string& text);

enum class Method { lehmann, krylov };
std::string to_string(Method method);
Method method_from_string(const std::string& text);

enum class ResponsePart { full, absorption, photoluminescence };
std::string to_string(ResponsePart part);
ResponsePart response_part_from_string(const std::string& text);

/// Spectral weights on a (q, omega) grid.
struct SpectralGrid {
  std::vector<double> q_values;
  std::vector<double> omega_values;
  Eigen::MatrixXd weights;  ///< rows: q, columns: omega
  Channel channel = Channel::photon;
  double gamma = 0.04;
  ModelParams params;
  std::string method;
  int reference_site = -1;
  double min_weight = 0.0;
  std::vector<std::string> warnings;
};

/// q = 2 pi m / L (m = 0..L/2) on rings, q = pi m / L (m = 0..L) on open chains.
std::vector<double> default_q_grid(const ModelParams& params);
/// n equally spaced points from lo to hi inclusive.
std::vector<double> uniform_grid(double lo, double hi, int n);
/// RangeError unless the values are finite and strictly increasing.
void check_grid(const std::vector<double>& values, const std::string& name);

struct StructureFactorOptions {
  Channel channel = Channel::photon;
  Method method = Method::lehmann;
  double gamma = 0.04;
  std::optional<int> j0;  ///< default: L / 2
  double T = 500.0;
  double dt = 0.1;
  std::size_t dense_limit = kDefaultDenseLimit;
  int krylov_dim = 16;
  double propagation_tol = 1e-9;  ///< per-step Krylov error bound
  bool zero_q0 = true;
  GroundStateOptions ground{1e-10, 20000, 20240917, 64, true};
};

/// Dynamic structure factor
///   S(q, w) = Re (1/pi) int_0^inf dt e^{i w t - Gamma t / 2}
///             sum_j e^{-i q (j - j0)} <dn_j(t) dn_j0(0)>.
/// `lehmann` evaluates the integral in closed form from a dense
/// eigendecomposition; `krylov` propagates dn_j0 |0> to T with step dt.
SpectralGrid structure_factor(const ModelParams& params, const std::vector<double>& q_grid,
                              const std::vector<double>& omega_grid,
                              const StructureFactorOptions& options = {});

/// sum_j e^{-i q (j - j0)} <dn_j dn_j0> (real part), the frequency integral of S
/// in the limit Gamma -> 0.
std::vector<double> equal_time_correlator(const ModelParams& params,
                                          const std::vector<double>& q_grid, Channel channel,
                                          std::optional<int> j0 = std::nullopt,
                                          const GroundStateOptions& ground = {});

struct SumRuleRow {
  double q = 0.0;
  double integral = 0.0;
  double equal_time = 0.0;
  double relative_error = 0.0;
};
/// Trapezoidal frequency integral of each q row against the equal-time value.
std::vector<SumRuleRow> sum_rule_report(const SpectralGrid& grid,
                                        const std::vector<double>& equal_time);

struct Pole {
  double energy = 0.0;
  double weight = 0.0;
};

/// Pole representation of -Im chi_res per q.
struct LehmannSpectrum {
  std::vector<double> q_values;
  std::vector<std::vector<Pole>> absorption;         ///< at E_m(N+1) - E_0
  std::vector<std::vector<Pole>> photoluminescence;  ///< at E_0 - E_m(N-1)
  double gamma = 0.04;

  /// -Im chi at (q_values[q_index], omega).
  double evaluate(std::size_t q_index, double omega, ResponsePart part) const;
};

struct ResponseOptions {
  ResponsePart part = ResponsePart::full;
  double gamma = 0.04;
  std::size_t dense_limit = kDefaultDenseLimit;
  /// Poles with weight below this are dropped.
  double weight_floor = 1e-14;
};

/// Poles of <[a_q(t), a_q^+(0)]> with a_q = L^{-1/2} sum_j e^{-i q j} a_j.
LehmannSpectrum response_poles(const ModelParams& params, const std::vector<double>& q_grid,
                               const ResponseOptions& options = {});

/// -Im chi_res(q, w): absorption minus photoluminescence for `full`.
SpectralGrid response_chi(const ModelParams& params, const std::vector<double>& q_grid,
                          const std::vector<double>& omega_grid,
                          const ResponseOptions& options = {});
SpectralGrid response_chi(const LehmannSpectrum& poles, const ModelParams& params,
                          const std::vector<double>& omega_grid, ResponsePart part);

/// Maximizes f on [lo, hi] by golden-section search.
double refine_peak(const std::function<double(double)>& f, double lo, double hi,
                   double tol = 1e-10);

/// Indices of interior local maxima whose prominence (height above the higher
/// of the two neighbouring minima) is at least `min_prominence`.
std::vector<std::size_t> find_peaks(const std::vector<double>& values, double min_prominence);

/// Peak energies of -Im chi at one q, located on `omega_grid` and refined on
/// the analytic Lorentzian sum.
std::vector<double> response_peaks(const LehmannSpectrum& spectrum, std::size_t q_index,
                                   ResponsePart part, const std::vector<double>& omega_grid,
                                   double min_prominence);

/// CSV with columns q, omega, weight (17 significant digits).
void write_csv(const SpectralGrid& grid, const std::filesystem::path& path);

}  // namespace polariton::spectra
