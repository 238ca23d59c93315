#include "polariton/spectra.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <sstream>

#include "polariton/error.hpp"
#include "polariton/io.hpp"

namespace polariton::spectra {
namespace {

using Complex = std::complex<double>;
constexpr double kPi = std::numbers::pi;

int default_reference(const ModelParams& params, std::optional<int> j0) {
  const int site = j0.value_or(params.L / 2);
  if (site < 0 || site >= params.L) throw RangeError("reference site outside the chain");
  return site;
}

int channel_offset(Channel channel, int L) {
  switch (channel) {
    case Channel::photon:
      return 0;
    case Channel::exciton:
      return L;
    default:
      throw RangeError("structure factor needs the photon or exciton channel");
  }
}

// Columns dn_j |0> for every site j.
Eigen::MatrixXd density_fluctuations(const FockBasis& basis, const Eigen::VectorXd& ground,
                                     int offset) {
  const int L = basis.sites();
  const auto dim = static_cast<Eigen::Index>(basis.size());
  Eigen::MatrixXd out(dim, L);
  for (int j = 0; j < L; ++j) {
    double mean = 0.0;
    for (Eigen::Index i = 0; i < dim; ++i) {
      mean += ground(i) * ground(i) * basis.occupations(static_cast<std::size_t>(i))[offset + j];
    }
    for (Eigen::Index i = 0; i < dim; ++i) {
      out(i, j) = (basis.occupations(static_cast<std::size_t>(i))[offset + j] - mean) * ground(i);
    }
  }
  return out;
}

// Phase factors e^{-i q (j - j0)}.
Eigen::VectorXcd relative_phases(double q, int L, int j0) {
  Eigen::VectorXcd phase(L);
  for (int j = 0; j < L; ++j) phase(j) = std::polar(1.0, -q * (j - j0));
  return phase;
}

// Closed form of (1/pi) int_0^inf e^{(i delta - gamma/2) t} dt.
Complex one_sided_kernel(double delta, double gamma) {
  const double h = 0.5 * gamma;
  return Complex(h, delta) / (kPi * (delta * delta + h * h));
}

void finalize(SpectralGrid& grid, bool zero_q0) {
  if (zero_q0) {
    for (std::size_t iq = 0; iq < grid.q_values.size(); ++iq) {
      if (std::abs(grid.q_values[iq]) < 1e-12) grid.weights.row(static_cast<Eigen::Index>(iq)).setZero();
    }
  }
  grid.min_weight = grid.weights.size() ? grid.weights.minCoeff() : 0.0;
  if (grid.min_weight < -1e-10) {
    std::ostringstream msg;
    msg << "negative spectral weight " << grid.min_weight << " beyond roundoff";
    grid.warnings.push_back(msg.str());
  }
}

struct SectorGround {
  FockBasis basis;
  double energy = 0.0;
  Eigen::VectorXd state;
  DenseSpectrum spectrum;  // empty unless dense
  bool degenerate = false;
};

SectorGround dense_ground(const ModelParams& params, std::size_t dense_limit) {
  FockBasis basis = make_basis(params);
  if (basis.size() > dense_limit) {
    throw CapacityError("sector dimension " + std::to_string(basis.size()) + " exceeds dense limit " +
                        std::to_string(dense_limit));
  }
  const SparseOperator H = build_ladder_hamiltonian(params, basis);
  DenseSpectrum spectrum = dense_spectrum(H, dense_limit);
  SectorGround g{std::move(basis), spectrum.values(0), spectrum.vectors.col(0), {}, false};
  g.degenerate = spectrum.values.size() > 1 && spectrum.values(1) - spectrum.values(0) < kDegeneracyThreshold;
  g.spectrum = std::move(spectrum);
  return g;
}

// Amplitudes <target_i| a_j^+ |source> (create) or <target_i| a_j |source> for photon site j.
Eigen::VectorXd apply_photon(const FockBasis& source, const Eigen::VectorXd& state,
                             const FockBasis& target, int site, bool create) {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(target.size()));
  std::vector<std::uint8_t> occ(source.modes());
  for (std::size_t i = 0; i < source.size(); ++i) {
    const double amp = state(static_cast<Eigen::Index>(i));
    if (amp == 0.0) continue;
    auto src = source.occupations(i);
    std::copy(src.begin(), src.end(), occ.begin());
    const int n = occ[site];
    double factor;
    if (create) {
      occ[site] = static_cast<std::uint8_t>(n + 1);
      factor = std::sqrt(n + 1.0);
    } else {
      if (n == 0) continue;
      occ[site] = static_cast<std::uint8_t>(n - 1);
      factor = std::sqrt(static_cast<double>(n));
    }
    // States beyond the target sector's caps are truncated away.
    if (auto k = target.find(occ)) out(static_cast<Eigen::Index>(*k)) += factor * amp;
  }
  return out;
}

double lorentz(double delta, double gamma) {
  const double h = 0.5 * gamma;
  return h / (delta * delta + h * h);
}

}  // namespace

std::string to_string(Channel channel) {
  switch (channel) {
    case Channel::photon: return "photon";
    case Channel::exciton: return "exciton";
    case Channel::response: return "response";
    case Channel::absorption: return "absorption";
    case Channel::photoluminescence: return "photoluminescence";
  }
  return "unknown";
}

Channel channel_from_string(const std::string& text) {
  for (Channel c : {Channel::photon, Channel::exciton, Channel::response, Channel::absorption,
                    Channel::photoluminescence}) {
    if (to_string(c) == text) return c;
  }
  throw RangeError("unknown channel '" + text + "'");
}

std::string to_string(Method method) { return method == Method::lehmann ? "lehmann" : "krylov"; }

Method method_from_string(const std::string& text) {
  if (text == "lehmann") return Method::lehmann;
  if (text == "krylov") return Method::krylov;
  throw RangeError("unknown spectral method '" + text + "'");
}

std::string to_string(ResponsePart part) {
  switch (part) {
    case ResponsePart::full: return "full";
    case ResponsePart::absorption: return "absorption";
    case ResponsePart::photoluminescence: return "photoluminescence";
  }
  return "unknown";
}

ResponsePart response_part_from_string(const std::string& text) {
  for (ResponsePart p : {ResponsePart::full, ResponsePart::absorption, ResponsePart::photoluminescence}) {
    if (to_string(p) == text) return p;
  }
  throw RangeError("unknown response part '" + text + "'");
}

std::vector<double> default_q_grid(const ModelParams& params) {
  std::vector<double> q;
  if (params.boundary == Boundary::periodic) {
    for (int m = 0; m <= params.L / 2; ++m) q.push_back(2.0 * kPi * m / params.L);
  } else {
    for (int m = 0; m <= params.L; ++m) q.push_back(kPi * m / params.L);
  }
  return q;
}

std::vector<double> uniform_grid(double lo, double hi, int n) {
  if (n < 2 || !(hi > lo)) throw RangeError("grid needs n >= 2 and hi > lo");
  std::vector<double> g(n);
  for (int i = 0; i < n; ++i) g[i] = lo + (hi - lo) * i / (n - 1);
  return g;
}

void check_grid(const std::vector<double>& values, const std::string& name) {
  if (values.empty()) throw RangeError(name + " grid is empty");
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!std::isfinite(values[i])) throw RangeError(name + " grid has a non-finite value");
    if (i > 0 && !(values[i] > values[i - 1])) throw RangeError(name + " grid is not strictly increasing");
  }
}

SpectralGrid structure_factor(const ModelParams& params, const std::vector<double>& q_grid,
                              const std::vector<double>& omega_grid,
                              const StructureFactorOptions& options) {
  params.validate();
  check_grid(q_grid, "q");
  check_grid(omega_grid, "omega");
  if (!(options.gamma > 0.0)) throw RangeError("broadening must be positive");
  const int L = params.L;
  const int j0 = default_reference(params, options.j0);
  const int offset = channel_offset(options.channel, L);

  SpectralGrid grid;
  grid.q_values = q_grid;
  grid.omega_values = omega_grid;
  grid.channel = options.channel;
  grid.gamma = options.gamma;
  grid.params = params;
  grid.method = to_string(options.method);
  grid.reference_site = j0;
  const auto nq = static_cast<Eigen::Index>(q_grid.size());
  const auto nw = static_cast<Eigen::Index>(omega_grid.size());
  grid.weights = Eigen::MatrixXd::Zero(nq, nw);

  if (options.method == Method::lehmann) {
    const SectorGround g = dense_ground(params, options.dense_limit);
    if (g.degenerate) grid.warnings.push_back("degenerate ground state; spectrum depends on the chosen vector");
    const Eigen::MatrixXd dn = density_fluctuations(g.basis, g.state, offset);
    const Eigen::MatrixXd P = g.spectrum.vectors.transpose() * dn;  // <n| dn_j |0>
    for (Eigen::Index iq = 0; iq < nq; ++iq) {
      const Eigen::VectorXcd phase = relative_phases(q_grid[iq], L, j0);
      for (Eigen::Index n = 0; n < P.rows(); ++n) {
        const double right = P(n, j0);
        if (std::abs(right) < 1e-14) continue;
        const Complex c = right * (P.row(n).cast<Complex>() * phase)(0);
        if (std::abs(c) < 1e-15) continue;
        const double excitation = g.spectrum.values(n) - g.energy;
        for (Eigen::Index iw = 0; iw < nw; ++iw) {
          grid.weights(iq, iw) += (c * one_sided_kernel(omega_grid[iw] - excitation, options.gamma)).real();
        }
      }
    }
  } else {
    if (!(options.dt > 0.0) || !(options.T > options.dt)) throw RangeError("need 0 < dt < T");
    const FockBasis basis = make_basis(params);
    const SparseOperator H = build_ladder_hamiltonian(params, basis);
    const GroundStateResult ground = ground_state(H, options.ground);
    if (ground.degenerate) grid.warnings.push_back("degenerate ground state; spectrum depends on the chosen vector");
    const Eigen::MatrixXd dn = density_fluctuations(basis, ground.state.amplitudes, offset);
    const auto dim = static_cast<Eigen::Index>(basis.size());
    const int steps = static_cast<int>(std::llround(options.T / options.dt));

    // C(t, j) = <0| dn_j e^{-i (H - E0) t} dn_j0 |0>.
    Eigen::MatrixXcd corr(steps + 1, L);
    Eigen::VectorXcd phi = dn.col(j0).cast<Complex>();
    auto apply = [&H, dim](const Eigen::VectorXcd& x, Eigen::VectorXcd& y) {
      y.resize(dim);
      H.apply(std::span<const Complex>(x.data(), static_cast<std::size_t>(dim)),
              std::span<Complex>(y.data(), static_cast<std::size_t>(dim)));
    };
    const Eigen::MatrixXcd dn_c = dn.cast<Complex>();
    Eigen::VectorXcd w(dim);
    int max_dim = std::max(4, options.krylov_dim);
    double worst_error = 0.0;
    for (int step = 0; step <= steps; ++step) {
      corr.row(step) = (dn_c.adjoint() * phi).transpose();
      if (step == steps) break;
      // Short-iteration Lanczos step exp(-i (H - E0) dt).
      const double beta0 = phi.norm();
      if (beta0 == 0.0) {
        continue;
      }
      int m = std::min<Eigen::Index>(max_dim, dim);
      while (true) {
        Eigen::MatrixXcd Q(dim, m);
        Eigen::VectorXd alpha(m), beta(m);
        Q.col(0) = phi / beta0;
        int used = m;
        double tail = 0.0;
        for (int k = 0; k < m; ++k) {
          apply(Q.col(k), w);
          w -= ground.energy * Q.col(k);
          alpha(k) = Q.col(k).dot(w).real();
          w -= Q.leftCols(k + 1) * (Q.leftCols(k + 1).adjoint() * w);
          w -= Q.leftCols(k + 1) * (Q.leftCols(k + 1).adjoint() * w);
          beta(k) = w.norm();
          if (k + 1 < m) {
            if (beta(k) < 1e-13) {
              used = k + 1;
              break;
            }
            Q.col(k + 1) = w / beta(k);
          }
        }
        tail = used == m ? beta(m - 1) : 0.0;
        Eigen::MatrixXd T = Eigen::MatrixXd::Zero(used, used);
        for (int k = 0; k < used; ++k) {
          T(k, k) = alpha(k);
          if (k + 1 < used) T(k, k + 1) = T(k + 1, k) = beta(k);
        }
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(T);
        Eigen::VectorXcd coeff(used);
        for (int k = 0; k < used; ++k) {
          coeff(k) = std::polar(eig.eigenvectors()(0, k), -eig.eigenvalues()(k) * options.dt);
        }
        const Eigen::VectorXcd y = eig.eigenvectors().cast<Complex>() * coeff;
        const double error = tail * std::abs(y(used - 1)) * beta0;
        if (error <= options.propagation_tol * beta0 || used < m) {
          worst_error = std::max(worst_error, error / beta0);
          phi = beta0 * (Q.leftCols(used) * y);
          break;
        }
        if (m >= std::min<Eigen::Index>(4 * max_dim, dim)) {
          throw ConvergenceError("Krylov propagation error " + std::to_string(error / beta0) +
                                     " exceeds tolerance",
                                 error / beta0);
        }
        m = static_cast<int>(std::min<Eigen::Index>(2 * m, dim));
      }
    }

    // Trapezoidal one-sided transform with e^{-Gamma t / 2} damping.
    Eigen::VectorXd tw(steps + 1);
    for (int s = 0; s <= steps; ++s) {
      tw(s) = options.dt * ((s == 0 || s == steps) ? 0.5 : 1.0) * std::exp(-0.5 * options.gamma * s * options.dt);
    }
    for (Eigen::Index iq = 0; iq < nq; ++iq) {
      const Eigen::VectorXcd G = corr * relative_phases(q_grid[iq], L, j0);
      for (Eigen::Index iw = 0; iw < nw; ++iw) {
        Complex acc = 0.0;
        const Complex rot = std::polar(1.0, omega_grid[iw] * options.dt);
        Complex phase = 1.0;
        for (int s = 0; s <= steps; ++s) {
          acc += tw(s) * phase * G(s);
          phase *= rot;
        }
        grid.weights(iq, iw) = acc.real() / kPi;
      }
    }
    if (worst_error > 0.0) {
      std::ostringstream msg;
      msg << "max Krylov step error " << worst_error;
      grid.warnings.push_back(msg.str());
    }
  }
  finalize(grid, options.zero_q0);
  return grid;
}

std::vector<double> equal_time_correlator(const ModelParams& params,
                                          const std::vector<double>& q_grid, Channel channel,
                                          std::optional<int> j0, const GroundStateOptions& ground) {
  params.validate();
  const int L = params.L;
  const int ref = default_reference(params, j0);
  const int offset = channel_offset(channel, L);
  const FockBasis basis = make_basis(params);
  const SparseOperator H = build_ladder_hamiltonian(params, basis);
  const GroundStateResult g = ground_state(H, ground);
  const Eigen::MatrixXd dn = density_fluctuations(basis, g.state.amplitudes, offset);
  const Eigen::VectorXd overlaps = dn.transpose() * dn.col(ref);  // <dn_j dn_j0>
  std::vector<double> out;
  for (double q : q_grid) {
    out.push_back((relative_phases(q, L, ref).transpose() * overlaps.cast<Complex>())(0).real());
  }
  return out;
}

std::vector<SumRuleRow> sum_rule_report(const SpectralGrid& grid,
                                        const std::vector<double>& equal_time) {
  if (equal_time.size() != grid.q_values.size()) throw MismatchError("one equal-time value per q required");
  std::vector<SumRuleRow> rows;
  const auto& w = grid.omega_values;
  for (std::size_t iq = 0; iq < grid.q_values.size(); ++iq) {
    double integral = 0.0;
    for (std::size_t i = 1; i < w.size(); ++i) {
      integral += 0.5 * (w[i] - w[i - 1]) *
                  (grid.weights(static_cast<Eigen::Index>(iq), static_cast<Eigen::Index>(i)) +
                   grid.weights(static_cast<Eigen::Index>(iq), static_cast<Eigen::Index>(i - 1)));
    }
    const double ref = equal_time[iq];
    const double rel = std::abs(ref) > 1e-14 ? std::abs(integral - ref) / std::abs(ref) : std::abs(integral - ref);
    rows.push_back({grid.q_values[iq], integral, ref, rel});
  }
  return rows;
}

double LehmannSpectrum::evaluate(std::size_t q_index, double omega, ResponsePart part) const {
  double value = 0.0;
  if (part != ResponsePart::photoluminescence) {
    for (const auto& p : absorption[q_index]) value += p.weight * lorentz(omega - p.energy, gamma);
  }
  if (part != ResponsePart::absorption) {
    const double sign = part == ResponsePart::full ? -1.0 : 1.0;
    for (const auto& p : photoluminescence[q_index]) value += sign * p.weight * lorentz(omega - p.energy, gamma);
  }
  return value;
}

LehmannSpectrum response_poles(const ModelParams& params, const std::vector<double>& q_grid,
                               const ResponseOptions& options) {
  params.validate();
  check_grid(q_grid, "q");
  if (!(options.gamma > 0.0)) throw RangeError("broadening must be positive");
  const int L = params.L;
  const SectorGround ground = dense_ground(params, options.dense_limit);

  LehmannSpectrum out;
  out.q_values = q_grid;
  out.gamma = options.gamma;
  out.absorption.resize(q_grid.size());
  out.photoluminescence.resize(q_grid.size());

  auto collect = [&](int particles, bool create, std::vector<std::vector<Pole>>& poles) {
    const ModelParams sector_params = params.with_particles(particles);
    const SectorGround sector = dense_ground(sector_params, options.dense_limit);
    // A(m, j) = <m| a_j^(+) |0>.
    Eigen::MatrixXd amp(static_cast<Eigen::Index>(sector.basis.size()), L);
    for (int j = 0; j < L; ++j) {
      amp.col(j) = sector.spectrum.vectors.transpose() *
                   apply_photon(ground.basis, ground.state, sector.basis, j, create);
    }
    for (std::size_t iq = 0; iq < q_grid.size(); ++iq) {
      // a_q^+ carries e^{+iqj}, a_q carries e^{-iqj}.
      Eigen::VectorXcd phase(L);
      for (int j = 0; j < L; ++j) phase(j) = std::polar(1.0 / std::sqrt(double(L)), (create ? 1.0 : -1.0) * q_grid[iq] * j);
      const Eigen::VectorXcd m = amp.cast<Complex>() * phase;
      for (Eigen::Index k = 0; k < m.size(); ++k) {
        const double weight = std::norm(m(k));
        if (weight < options.weight_floor) continue;
        const double energy = create ? sector.spectrum.values(k) - ground.energy
                                     : ground.energy - sector.spectrum.values(k);
        poles[iq].push_back({energy, weight});
      }
    }
  };
  collect(params.N + 1, true, out.absorption);
  if (params.N > 0) collect(params.N - 1, false, out.photoluminescence);
  return out;
}

SpectralGrid response_chi(const LehmannSpectrum& poles, const ModelParams& params,
                          const std::vector<double>& omega_grid, ResponsePart part) {
  check_grid(omega_grid, "omega");
  SpectralGrid grid;
  grid.q_values = poles.q_values;
  grid.omega_values = omega_grid;
  grid.channel = part == ResponsePart::full         ? Channel::response
                 : part == ResponsePart::absorption ? Channel::absorption
                                                    : Channel::photoluminescence;
  grid.gamma = poles.gamma;
  grid.params = params;
  grid.method = "lehmann";
  const auto nq = static_cast<Eigen::Index>(grid.q_values.size());
  const auto nw = static_cast<Eigen::Index>(omega_grid.size());
  grid.weights.resize(nq, nw);
  for (Eigen::Index iq = 0; iq < nq; ++iq) {
    for (Eigen::Index iw = 0; iw < nw; ++iw) {
      grid.weights(iq, iw) = poles.evaluate(static_cast<std::size_t>(iq), omega_grid[iw], part);
    }
  }
  grid.min_weight = grid.weights.size() ? grid.weights.minCoeff() : 0.0;
  return grid;
}

SpectralGrid response_chi(const ModelParams& params, const std::vector<double>& q_grid,
                          const std::vector<double>& omega_grid, const ResponseOptions& options) {
  return response_chi(response_poles(params, q_grid, options), params, omega_grid, options.part);
}

double refine_peak(const std::function<double(double)>& f, double lo, double hi, double tol) {
  const double ratio = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo, b = hi;
  double c = b - ratio * (b - a);
  double d = a + ratio * (b - a);
  double fc = f(c), fd = f(d);
  while (b - a > tol) {
    if (fc > fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - ratio * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + ratio * (b - a);
      fd = f(d);
    }
  }
  return 0.5 * (a + b);
}

std::vector<std::size_t> find_peaks(const std::vector<double>& values, double min_prominence) {
  std::vector<std::size_t> peaks;
  const std::size_t n = values.size();
  for (std::size_t i = 1; i + 1 < n; ++i) {
    if (!(values[i] > values[i - 1] && values[i] >= values[i + 1])) continue;
    // Walk outwards until a higher point or the edge; track the minima.
    double left_min = values[i];
    for (std::size_t k = i; k-- > 0;) {
      if (values[k] > values[i]) break;
      left_min = std::min(left_min, values[k]);
    }
    double right_min = values[i];
    for (std::size_t k = i + 1; k < n; ++k) {
      if (values[k] > values[i]) break;
      right_min = std::min(right_min, values[k]);
    }
    if (values[i] - std::max(left_min, right_min) >= min_prominence) peaks.push_back(i);
  }
  return peaks;
}

std::vector<double> response_peaks(const LehmannSpectrum& spectrum, std::size_t q_index,
                                   ResponsePart part, const std::vector<double>& omega_grid,
                                   double min_prominence) {
  std::vector<double> values;
  for (double w : omega_grid) values.push_back(spectrum.evaluate(q_index, w, part));
  std::vector<double> out;
  for (std::size_t i : find_peaks(values, min_prominence)) {
    out.push_back(refine_peak([&](double w) { return spectrum.evaluate(q_index, w, part); },
                              omega_grid[i - 1], omega_grid[i + 1]));
  }
  return out;
}

void write_csv(const SpectralGrid& grid, const std::filesystem::path& path) {
  std::string text = "q,omega,weight\n";
  for (std::size_t iq = 0; iq < grid.q_values.size(); ++iq) {
    for (std::size_t iw = 0; iw < grid.omega_values.size(); ++iw) {
      text += format_double(grid.q_values[iq]) + "," + format_double(grid.omega_values[iw]) + "," +
              format_double(grid.weights(static_cast<Eigen::Index>(iq), static_cast<Eigen::Index>(iw))) + "\n";
    }
  }
  write_text_atomic(path, text);
}

}  // namespace polariton::spectra
