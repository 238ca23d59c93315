#include "polariton/cli.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "polariton/analytic.hpp"
#include "polariton/error.hpp"
#include "polariton/exact.hpp"
#include "polariton/io.hpp"
#include "polariton/model.hpp"
#include "polariton/mps.hpp"
#include "polariton/spectra.hpp"

namespace polariton::cli {
namespace {

using nlohmann::json;
using Table = std::vector<std::vector<std::string>>;

const std::vector<std::string> kSubcommands = {"blueshift-scan", "g2", "sqw", "chi", "finite-size",
                                               "photonic-fraction", "entropy", "upol"};

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::string num(double v) { return format_double(v); }

// Everything one subcommand produced.
struct Output {
  std::vector<std::pair<std::string, std::string>> files;  // name, contents
  std::vector<std::string> warnings;
  bool converged = true;
  json extra = json::object();
};

std::string to_csv(const std::vector<std::string>& header, const Table& rows) {
  std::string text;
  for (std::size_t i = 0; i < header.size(); ++i) text += (i ? "," : "") + header[i];
  text += "\n";
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) text += (i ? "," : "") + row[i];
    text += "\n";
  }
  return text;
}

ModelParams model_from(const RunConfig& c) {
  ModelParams p;
  p.omega_x = c.number("omega_x");
  p.J = c.number("J");
  p.Omega = c.number("Omega");
  p.U = c.number("U");
  p.L = c.integer("L");
  p.N = c.integer("N");
  p.ell = c.number("ell");
  p.boundary = boundary_from_string(c.text("boundary"));
  p.cap_photon = c.optional_integer("cap_photon");
  p.cap_exciton = c.optional_integer("cap_exciton");
  p.hard_core_large_u = c.flag("hard_core_large_u");
  return p;
}

GroundStateOptions ground_options(const RunConfig& c) {
  GroundStateOptions o;
  o.tol = c.number("tol");
  o.max_iter = c.integer("max_iter");
  o.seed = static_cast<std::uint64_t>(c.integer("seed"));
  return o;
}

mps::DmrgOptions dmrg_options(const RunConfig& c) {
  mps::DmrgOptions o;
  o.chi_max = c.integer("chi_max");
  o.n_sweeps = c.integer("sweeps");
  o.min_sweeps = c.integer("min_sweeps");
  o.truncation_cutoff = c.number("cutoff");
  o.energy_tol = c.number("energy_tol");
  o.seed = static_cast<std::uint64_t>(c.integer("seed"));
  o.number_penalty = c.flag("number_penalty");
  return o;
}

// Scan values from an explicit list or a (possibly logarithmic) range.
std::vector<double> scan_values(const RunConfig& c) {
  if (c.has("values") && !c.text("values").empty()) return c.numbers("values");
  const double lo = c.number("scan_min");
  const double hi = c.number("scan_max");
  const int n = c.integer("scan_points");
  if (n < 1) throw ConfigError("scan_points must be positive");
  std::vector<double> v;
  for (int i = 0; i < n; ++i) {
    const double t = n == 1 ? 0.0 : double(i) / (n - 1);
    v.push_back(c.flag("scan_log") ? lo * std::pow(hi / lo, t) : lo + (hi - lo) * t);
  }
  return v;
}

ModelParams scan_point(const RunConfig& c, ModelParams p, const std::string& param, double value) {
  if (param == "J") {
    p.J = value;
  } else if (param == "U") {
    p.U = value;
  } else if (param == "Omega") {
    p.Omega = value;
  } else if (param == "rho") {
    p.N = static_cast<int>(std::lround(value * p.L));
  } else if (param == "L") {
    p.L = static_cast<int>(std::lround(value));
    if (c.has("rho")) p.N = static_cast<int>(std::lround(c.number("rho") * p.L));
  } else if (param == "N") {
    p.N = static_cast<int>(std::lround(value));
  } else {
    throw ConfigError("unknown scan parameter '" + param + "'");
  }
  return p;
}

std::string describe(const ModelParams& p) {
  std::ostringstream s;
  s << "L=" << p.L << " N=" << p.N << " J=" << p.J << " U=" << p.U;
  return s.str();
}

// Runs fn(i) for i in [0, n) on up to `threads` workers; rethrows the first
// failure in scan order, labelled by `label(i)`.
void run_points(int n, int threads, const std::function<void(int)>& fn,
                const std::function<std::string(int)>& label) {
  std::vector<std::exception_ptr> errors(n);
  std::atomic<int> next{0};
  auto worker = [&] {
    for (int i = next++; i < n; i = next++) {
      try {
        fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const int count = std::max(1, std::min(threads, n));
  std::vector<std::thread> pool;
  for (int t = 1; t < count; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  for (int i = 0; i < n; ++i) {
    if (!errors[i]) continue;
    try {
      std::rethrow_exception(errors[i]);
    } catch (const ConvergenceError& e) {
      throw ConvergenceError("scan point " + label(i) + ": " + e.what(), e.best_residual());
    } catch (const CapacityError& e) {
      throw CapacityError("scan point " + label(i) + ": " + e.what());
    } catch (const RangeError& e) {
      throw RangeError("scan point " + label(i) + ": " + e.what());
    } catch (const ConfigError& e) {
      throw ConfigError("scan point " + label(i) + ": " + e.what());
    } catch (const Error& e) {
      throw Error("scan point " + label(i) + ": " + e.what());
    }
  }
}

double lower_band_bottom(const ModelParams& p) {
  return analytic::polariton_bands(0.0, p.J, p.Omega, p.omega_x).first;
}

struct Energy {
  double value = 0.0;
  bool converged = true;
  std::string note;
};

Energy ground_energy(const RunConfig& c, const ModelParams& p, const std::string& method) {
  p.validate();
  if (method == "ed") {
    const FockBasis basis = make_basis(p);
    const GroundStateResult g = ground_state(build_ladder_hamiltonian(p, basis), ground_options(c));
    return {g.energy, true, g.degenerate ? "degenerate" : ""};
  }
  if (method == "dmrg") {
    const mps::DmrgResult r = mps::dmrg_ground_state(p, dmrg_options(c));
    return {r.energy, r.converged, r.converged ? "" : "not converged"};
  }
  const double upol = born_oppenheimer_upol(p.U, p.Omega);
  const double J_pol = 0.5 * p.J;
  if (method == "effective-ed") {
    const FockBasis basis = FockBasis::single_species(p.L, p.N, p.N);
    const GroundStateResult g =
        ground_state(build_polariton_hamiltonian(p, upol, basis), ground_options(c));
    return {g.energy, true, g.degenerate ? "degenerate" : ""};
  }
  if (method == "tg") {
    return {p.boundary == Boundary::periodic ? analytic::tg_energy_discrete(p.N, p.L, J_pol, p.Omega)
                                             : analytic::tg_energy_open(p.N, p.L, J_pol, p.Omega),
            true, ""};
  }
  if (method == "tc") return {tavis_cummings_ground_energy(p.L, p.N, p.Omega), true, ""};
  if (method == "bogoliubov") return {analytic::bogoliubov_energy(p.N, p.L, upol, p.Omega), true, ""};
  throw ConfigError("unknown method '" + method + "'");
}

Output cmd_blueshift_scan(const RunConfig& c) {
  const ModelParams base = model_from(c);
  const std::string param = c.text("scan");
  const std::string method = c.text("method");
  const std::vector<double> values = scan_values(c);
  const int n = static_cast<int>(values.size());
  std::vector<ModelParams> points;
  for (double v : values) points.push_back(scan_point(c, base, param, v));
  std::vector<Energy> energies(n);
  run_points(
      n, c.integer("threads"), [&](int i) { energies[i] = ground_energy(c, points[i], method); },
      [&](int i) { return std::to_string(i) + " (" + describe(points[i]) + ")"; });

  Output out;
  Table rows;
  for (int i = 0; i < n; ++i) {
    const ModelParams& p = points[i];
    const double per_particle = p.N > 0 ? energies[i].value / p.N - lower_band_bottom(p) : 0.0;
    rows.push_back({std::to_string(i), num(values[i]), std::to_string(p.L), std::to_string(p.N),
                    num(p.J), num(p.U), method, num(energies[i].value), num(per_particle),
                    energies[i].converged ? "1" : "0"});
    if (!energies[i].converged) out.converged = false;
    if (!energies[i].note.empty()) out.warnings.push_back("point " + std::to_string(i) + ": " + energies[i].note);
  }
  out.files.emplace_back("blueshift.csv", to_csv({"index", "scan_" + param, "L", "N", "J", "U", "method", "energy",
                                                  "blueshift_per_particle", "converged"},
                                                 rows));
  return out;
}

// g2 of both species for one parameter set.
struct G2Pair {
  CorrelationResult photon, exciton;
  bool converged = true;
};

G2Pair compute_g2(const RunConfig& c, const ModelParams& p, const std::string& method, int j0) {
  p.validate();
  G2Pair out;
  if (method == "ed") {
    const FockBasis basis = make_basis(p);
    const GroundStateResult g = ground_state(build_ladder_hamiltonian(p, basis), ground_options(c));
    out.photon = g2(g.state, basis, Species::photon, j0);
    out.exciton = g2(g.state, basis, Species::exciton, j0);
    out.photon.degenerate_warning = out.exciton.degenerate_warning = g.degenerate;
  } else if (method == "dmrg") {
    const mps::DmrgResult r = mps::dmrg_ground_state(p, dmrg_options(c));
    out.photon = mps::mps_measure_g2(r.state, Species::photon, j0);
    out.exciton = mps::mps_measure_g2(r.state, Species::exciton, j0);
    out.converged = r.converged;
  } else {
    throw ConfigError("g2 needs method ed or dmrg");
  }
  return out;
}

int reference_site(const RunConfig& c, const ModelParams& p) {
  return c.optional_integer("j0").value_or(p.L / 2);
}

Output cmd_g2(const RunConfig& c) {
  const ModelParams p = model_from(c);
  const int j0 = reference_site(c, p);
  const G2Pair g = compute_g2(c, p, c.text("method"), j0);
  Output out;
  Table rows;
  for (int j = 0; j < p.L; ++j) {
    rows.push_back({std::to_string(j), num(g.photon.values[j]), num(g.exciton.values[j])});
  }
  out.files.emplace_back("g2.csv", to_csv({"j", "g2_ph", "g2_X"}, rows));
  out.converged = g.converged;
  if (g.photon.degenerate_warning) out.warnings.push_back("degenerate ground state");
  out.extra["j0"] = j0;
  out.extra["normalization_density"] = g.photon.density;
  return out;
}

std::vector<double> omega_grid(const RunConfig& c) {
  return spectra::uniform_grid(c.number("omega_min"), c.number("omega_max"), c.integer("omega_points"));
}

std::vector<double> q_grid(const RunConfig& c, const ModelParams& p) {
  if (c.has("q_values") && !c.text("q_values").empty()) return c.numbers("q_values");
  return spectra::default_q_grid(p);
}

std::size_t nearest(const std::vector<double>& grid, double x) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < grid.size(); ++i) {
    if (std::abs(grid[i] - x) < std::abs(grid[best] - x)) best = i;
  }
  return best;
}

std::string grid_csv(const spectra::SpectralGrid& g) {
  Table rows;
  for (std::size_t iq = 0; iq < g.q_values.size(); ++iq) {
    for (std::size_t iw = 0; iw < g.omega_values.size(); ++iw) {
      rows.push_back({num(g.q_values[iq]), num(g.omega_values[iw]),
                      num(g.weights(static_cast<Eigen::Index>(iq), static_cast<Eigen::Index>(iw)))});
    }
  }
  return to_csv({"q", "omega", "weight"}, rows);
}

// Fig. 5 layout: the omega = 0 cut over q and the q = pi cut over omega.
void add_slices(Output& out, const spectra::SpectralGrid& g, const std::string& stem) {
  const std::size_t iw0 = nearest(g.omega_values, 0.0);
  Table omega0;
  for (std::size_t iq = 0; iq < g.q_values.size(); ++iq) {
    omega0.push_back({num(g.q_values[iq]), num(g.weights(static_cast<Eigen::Index>(iq), static_cast<Eigen::Index>(iw0)))});
  }
  out.files.emplace_back(stem + "_omega0.csv", to_csv({"q", "weight"}, omega0));
  const std::size_t iqpi = nearest(g.q_values, M_PI);
  Table qpi;
  for (std::size_t iw = 0; iw < g.omega_values.size(); ++iw) {
    qpi.push_back({num(g.omega_values[iw]), num(g.weights(static_cast<Eigen::Index>(iqpi), static_cast<Eigen::Index>(iw)))});
  }
  out.files.emplace_back(stem + "_qpi.csv", to_csv({"omega", "weight"}, qpi));
  out.extra["slice_omega"] = g.omega_values[iw0];
  out.extra["slice_q"] = g.q_values[iqpi];
}

Output cmd_sqw(const RunConfig& c) {
  const ModelParams p = model_from(c);
  spectra::StructureFactorOptions o;
  o.channel = spectra::channel_from_string(c.text("channel"));
  o.method = spectra::method_from_string(c.text("method"));
  o.gamma = c.number("gamma");
  o.j0 = reference_site(c, p);
  o.T = c.number("T");
  o.dt = c.number("dt");
  o.ground = ground_options(c);
  const auto qs = q_grid(c, p);
  const spectra::SpectralGrid g = spectra::structure_factor(p, qs, omega_grid(c), o);
  Output out;
  out.files.emplace_back("sqw.csv", grid_csv(g));
  add_slices(out, g, "sqw");
  const auto equal_time = spectra::equal_time_correlator(p, qs, o.channel, o.j0, o.ground);
  Table rows;
  for (const auto& r : spectra::sum_rule_report(g, equal_time)) {
    rows.push_back({num(r.q), num(r.integral), num(r.equal_time), num(r.relative_error)});
  }
  out.files.emplace_back("sqw_sum_rule.csv", to_csv({"q", "integral", "equal_time", "relative_error"}, rows));
  out.warnings = g.warnings;
  out.extra["reference_site"] = g.reference_site;
  out.extra["min_weight"] = g.min_weight;
  out.extra["q0_column"] = "zeroed";
  return out;
}

Output cmd_chi(const RunConfig& c) {
  const ModelParams p = model_from(c);
  spectra::ResponseOptions o;
  o.part = spectra::response_part_from_string(c.text("part"));
  o.gamma = c.number("gamma");
  const auto qs = q_grid(c, p);
  const auto ws = omega_grid(c);
  const spectra::LehmannSpectrum poles = spectra::response_poles(p, qs, o);
  const spectra::SpectralGrid g = spectra::response_chi(poles, p, ws, o.part);
  Output out;
  out.files.emplace_back("chi.csv", grid_csv(g));
  add_slices(out, g, "chi");
  const double peak_floor = c.number("peak_prominence") * std::max(1e-300, g.weights.cwiseAbs().maxCoeff());
  Table peaks;
  for (std::size_t iq = 0; iq < qs.size(); ++iq) {
    for (double w : spectra::response_peaks(poles, iq, o.part, ws, peak_floor)) {
      peaks.push_back({num(qs[iq]), num(w), num(poles.evaluate(iq, w, o.part))});
    }
  }
  out.files.emplace_back("chi_peaks.csv", to_csv({"q", "omega", "height"}, peaks));
  out.extra["a_q_normalization"] = "1/sqrt(L)";
  out.extra["output"] = "-Im chi";
  return out;
}

Output cmd_finite_size(const RunConfig& c) {
  const ModelParams base = model_from(c);
  const std::vector<double> values = scan_values(c);
  const int n = static_cast<int>(values.size());
  const int ed_max = c.integer("ed_max_L");
  std::vector<ModelParams> points;
  std::vector<std::string> methods;
  for (double v : values) {
    points.push_back(scan_point(c, base, "L", v));
    const std::string m = c.text("method");
    methods.push_back(m == "auto" ? (points.back().L <= ed_max ? "ed" : "dmrg") : m);
  }
  std::vector<Energy> energies(n);
  std::vector<G2Pair> correlations(n);
  run_points(
      n, c.integer("threads"),
      [&](int i) {
        const ModelParams& p = points[i];
        p.validate();
        if (methods[i] == "ed") {
          const FockBasis basis = make_basis(p);
          const GroundStateResult g = ground_state(build_ladder_hamiltonian(p, basis), ground_options(c));
          energies[i] = {g.energy, true, g.degenerate ? "degenerate" : ""};
          correlations[i].photon = g2(g.state, basis, Species::photon, p.L / 2);
          correlations[i].exciton = g2(g.state, basis, Species::exciton, p.L / 2);
        } else if (methods[i] == "dmrg") {
          const mps::DmrgResult r = mps::dmrg_ground_state(p, dmrg_options(c));
          energies[i] = {r.energy, r.converged, r.converged ? "" : "not converged"};
          correlations[i].photon = mps::mps_measure_g2(r.state, Species::photon, p.L / 2);
          correlations[i].exciton = mps::mps_measure_g2(r.state, Species::exciton, p.L / 2);
        } else {
          throw ConfigError("finite-size needs method auto, ed or dmrg");
        }
      },
      [&](int i) { return std::to_string(i) + " (" + describe(points[i]) + ")"; });

  Output out;
  Table rows;
  for (int i = 0; i < n; ++i) {
    const ModelParams& p = points[i];
    rows.push_back({std::to_string(p.L), std::to_string(p.N), methods[i], num(energies[i].value),
                    num(energies[i].value / p.N - lower_band_bottom(p)), energies[i].converged ? "1" : "0"});
    if (!energies[i].converged) out.converged = false;
    if (!energies[i].note.empty()) out.warnings.push_back("L=" + std::to_string(p.L) + ": " + energies[i].note);
  }
  out.files.emplace_back("finite_size.csv",
                         to_csv({"L", "N", "method", "energy", "blueshift_per_particle", "converged"}, rows));

  // Fig. 8 layout: g2(j, L/2) against j - L/2, one column pair per L.
  int lo = 0, hi = 0;
  for (const auto& p : points) {
    lo = std::min(lo, -(p.L / 2));
    hi = std::max(hi, p.L - 1 - p.L / 2);
  }
  std::vector<std::string> header = {"offset"};
  for (const auto& p : points) {
    header.push_back("g2_ph_L" + std::to_string(p.L));
    header.push_back("g2_X_L" + std::to_string(p.L));
  }
  Table g2rows;
  for (int d = lo; d <= hi; ++d) {
    std::vector<std::string> row = {std::to_string(d)};
    for (int i = 0; i < n; ++i) {
      const int j = points[i].L / 2 + d;
      const bool inside = j >= 0 && j < points[i].L;
      row.push_back(inside ? num(correlations[i].photon.values[j]) : "");
      row.push_back(inside ? num(correlations[i].exciton.values[j]) : "");
    }
    g2rows.push_back(row);
  }
  out.files.emplace_back("finite_size_g2.csv", to_csv(header, g2rows));
  return out;
}

Output cmd_photonic_fraction(const RunConfig& c) {
  const ModelParams base = model_from(c);
  const std::string param = c.text("scan");
  const std::string method = c.text("method");
  const std::vector<double> values = scan_values(c);
  const int n = static_cast<int>(values.size());
  std::vector<ModelParams> points;
  for (double v : values) points.push_back(scan_point(c, base, param, v));
  std::vector<double> fraction(n);
  std::vector<char> converged(n, 1);
  run_points(
      n, c.integer("threads"),
      [&](int i) {
        const ModelParams& p = points[i];
        p.validate();
        if (method == "ed") {
          const FockBasis basis = make_basis(p);
          const GroundStateResult g = ground_state(build_ladder_hamiltonian(p, basis), ground_options(c));
          fraction[i] = photonic_fraction(g.state, basis);
        } else if (method == "dmrg") {
          const mps::DmrgResult r = mps::dmrg_ground_state(p, dmrg_options(c));
          fraction[i] = mps::mps_photonic_fraction(r.state);
          converged[i] = r.converged;
        } else {
          throw ConfigError("photonic-fraction needs method ed or dmrg");
        }
      },
      [&](int i) { return std::to_string(i) + " (" + describe(points[i]) + ")"; });
  Output out;
  Table rows;
  for (int i = 0; i < n; ++i) {
    rows.push_back({num(values[i]), std::to_string(points[i].L), std::to_string(points[i].N), num(points[i].J),
                    num(points[i].U), num(fraction[i]), converged[i] ? "1" : "0"});
    if (!converged[i]) out.converged = false;
  }
  out.files.emplace_back("photonic_fraction.csv",
                         to_csv({"scan_" + param, "L", "N", "J", "U", "photonic_fraction", "converged"}, rows));
  return out;
}

Output cmd_entropy(const RunConfig& c) {
  const ModelParams base = model_from(c);
  const std::string param = c.text("scan");
  const std::string method = c.text("method");
  const std::vector<double> values = scan_values(c);
  const int n = static_cast<int>(values.size());
  std::vector<ModelParams> points;
  for (double v : values) points.push_back(scan_point(c, base, param, v));
  std::vector<double> light_matter(n, std::nan("")), left_right(n);
  std::vector<char> converged(n, 1);
  run_points(
      n, c.integer("threads"),
      [&](int i) {
        const ModelParams& p = points[i];
        p.validate();
        const int cut = p.L / 2 - 1;
        if (method == "ed") {
          const FockBasis basis = make_basis(p);
          const GroundStateResult g = ground_state(build_ladder_hamiltonian(p, basis), ground_options(c));
          light_matter[i] = von_neumann_entropy(g.state, basis, Partition::light_matter());
          left_right[i] = von_neumann_entropy(g.state, basis, Partition::left_right(cut));
        } else if (method == "dmrg") {
          mps::DmrgResult r = mps::dmrg_ground_state(p, dmrg_options(c));
          left_right[i] = mps::mps_bond_entropy(r.state, cut + 1);
          converged[i] = r.converged;
        } else {
          throw ConfigError("entropy needs method ed or dmrg");
        }
      },
      [&](int i) { return std::to_string(i) + " (" + describe(points[i]) + ")"; });
  Output out;
  Table rows;
  for (int i = 0; i < n; ++i) {
    rows.push_back({num(values[i]), std::to_string(points[i].L), std::to_string(points[i].N), num(points[i].J),
                    num(points[i].U), std::isnan(light_matter[i]) ? "" : num(light_matter[i]),
                    num(left_right[i]), converged[i] ? "1" : "0"});
    if (!converged[i]) out.converged = false;
  }
  out.files.emplace_back("entropy.csv", to_csv({"scan_" + param, "L", "N", "J", "U", "S_light_matter",
                                                "S_left_right", "converged"},
                                               rows));
  if (method == "dmrg") out.warnings.push_back("light-matter entropy needs ED; column left empty");
  return out;
}

Output cmd_upol(const RunConfig& c) {
  const double value = born_oppenheimer_upol(c.number("U"), c.number("Omega"));
  std::cout << num(value) << "\n";
  Output out;
  out.files.emplace_back("upol.csv", to_csv({"U", "Omega", "U_pol"}, {{num(c.number("U")), num(c.number("Omega")), num(value)}}));
  return out;
}

json manifest_for(const RunConfig& c, const Output& out) {
  json m;
  m["program"] = "polariton";
  m["version"] = POLARITON_VERSION;
  m["subcommand"] = c.subcommand;
  json config = json::object();
  for (const auto& [k, v] : c.values()) config[k] = v;
  m["config"] = config;
  const double mev = c.number("omega_mev");
  m["units"] = {{"energy", "Omega"},
                {"omega_mev", mev},
                {"note", "energies and couplings are in units of Omega; multiply by omega_mev for meV"},
                {"J_mev", c.number("J") * mev},
                {"U_mev", c.number("U") * mev},
                {"gamma_mev", c.has("gamma") ? c.number("gamma") * mev : 0.0}};
  json files = json::array();
  for (const auto& f : out.files) files.push_back(f.first);
  m["outputs"] = files;
  m["warnings"] = out.warnings;
  m["converged"] = out.converged;
  m["details"] = out.extra;
  return m;
}

}  // namespace

void RunConfig::set_default(const std::string& key, const std::string& value) {
  values_.try_emplace(key, value);
}

std::string RunConfig::text(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) throw ConfigError("missing configuration key '" + key + "'");
  return it->second;
}

double RunConfig::number(const std::string& key) const {
  const std::string t = text(key);
  try {
    std::size_t used = 0;
    const double v = std::stod(t, &used);
    if (trim(t.substr(used)).empty()) return v;
  } catch (const std::exception&) {
  }
  throw ConfigError("key '" + key + "' expects a number, got '" + t + "'");
}

int RunConfig::integer(const std::string& key) const {
  const std::string t = text(key);
  try {
    std::size_t used = 0;
    const long v = std::stol(t, &used);
    if (trim(t.substr(used)).empty()) return static_cast<int>(v);
  } catch (const std::exception&) {
  }
  throw ConfigError("key '" + key + "' expects an integer, got '" + t + "'");
}

bool RunConfig::flag(const std::string& key) const {
  const std::string t = text(key);
  if (t == "1" || t == "true" || t == "yes" || t == "on") return true;
  if (t == "0" || t == "false" || t == "no" || t == "off") return false;
  throw ConfigError("key '" + key + "' expects true/false, got '" + t + "'");
}

std::vector<double> RunConfig::numbers(const std::string& key) const {
  std::vector<double> out;
  std::stringstream ss(text(key));
  std::string item;
  RunConfig scratch;
  while (std::getline(ss, item, ',')) {
    if (trim(item).empty()) continue;
    scratch.set("x", trim(item));
    out.push_back(scratch.number("x"));
  }
  if (out.empty()) throw ConfigError("key '" + key + "' needs at least one value");
  return out;
}

std::optional<int> RunConfig::optional_integer(const std::string& key) const {
  if (!has(key) || text(key) == "auto" || text(key).empty()) return std::nullopt;
  return integer(key);
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  RunConfig config;
  if (path.extension() == ".json") {
    json m;
    try {
      m = json::parse(in);
    } catch (const json::exception& e) {
      throw ConfigError("invalid JSON in " + path.string() + ": " + e.what());
    }
    if (m.contains("subcommand")) config.subcommand = m["subcommand"].get<std::string>();
    const json& values = m.contains("config") ? m["config"] : m;
    for (const auto& [k, v] : values.items()) {
      if (k == "subcommand") continue;
      config.set(k, v.is_string() ? v.get<std::string>() : v.dump());
    }
    return config;
  }
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(path.string() + ":" + std::to_string(number) + ": expected key = value");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key == "subcommand") {
      config.subcommand = value;
    } else {
      config.set(key, value);
    }
  }
  return config;
}

void apply_override(RunConfig& config, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) throw ConfigError("override '" + assignment + "' is not key=value");
  config.set(trim(assignment.substr(0, eq)), trim(assignment.substr(eq + 1)));
}

void resolve_defaults(RunConfig& c) {
  const std::string& s = c.subcommand;
  if (std::find(kSubcommands.begin(), kSubcommands.end(), s) == kSubcommands.end()) {
    throw ConfigError("unknown subcommand '" + s + "'");
  }
  c.set_default("L", "8");
  c.set_default("N", "3");
  c.set_default("J", "0.1");
  c.set_default("U", "1");
  c.set_default("Omega", "1");
  c.set_default("omega_x", "0");
  c.set_default("ell", "1");
  c.set_default("boundary", "open");
  c.set_default("cap_photon", "auto");
  c.set_default("cap_exciton", "auto");
  c.set_default("hard_core_large_u", "false");
  c.set_default("seed", "20240917");
  c.set_default("threads", "1");
  c.set_default("out_dir", ".");
  c.set_default("omega_mev", "3");
  c.set_default("tol", "1e-9");
  c.set_default("max_iter", "20000");
  c.set_default("chi_max", "64");
  c.set_default("sweeps", "12");
  c.set_default("min_sweeps", "3");
  c.set_default("cutoff", "1e-10");
  c.set_default("energy_tol", "1e-10");
  c.set_default("number_penalty", "false");
  if (s == "blueshift-scan") {
    c.set_default("method", "ed");
    c.set_default("scan", "J");
    c.set_default("scan_min", "0.001");
    c.set_default("scan_max", "10");
    c.set_default("scan_points", "9");
    c.set_default("scan_log", "true");
  } else if (s == "g2") {
    c.set_default("method", "ed");
  } else if (s == "sqw") {
    c.set_default("method", "lehmann");
    c.set_default("channel", "photon");
    c.set_default("gamma", "0.04");
    c.set_default("T", "500");
    c.set_default("dt", "0.1");
    c.set_default("omega_min", "0");
    c.set_default("omega_max", "3");
    c.set_default("omega_points", "601");
  } else if (s == "chi") {
    c.set_default("part", "full");
    c.set_default("gamma", "0.04");
    c.set_default("omega_min", "-2");
    c.set_default("omega_max", "2");
    c.set_default("omega_points", "801");
    c.set_default("peak_prominence", "0.01");
  } else if (s == "finite-size") {
    c.set_default("method", "auto");
    c.set_default("rho", "0.25");
    c.set_default("values", "8,12,16");
    c.set_default("ed_max_L", "20");
  } else if (s == "photonic-fraction" || s == "entropy") {
    c.set_default("method", "ed");
    c.set_default("scan", "J");
    c.set_default("values", "1,10,100,1000");
  }
}

int execute(const RunConfig& config) {
  Output out;
  const std::string& s = config.subcommand;
  if (s == "blueshift-scan") out = cmd_blueshift_scan(config);
  else if (s == "g2") out = cmd_g2(config);
  else if (s == "sqw") out = cmd_sqw(config);
  else if (s == "chi") out = cmd_chi(config);
  else if (s == "finite-size") out = cmd_finite_size(config);
  else if (s == "photonic-fraction") out = cmd_photonic_fraction(config);
  else if (s == "entropy") out = cmd_entropy(config);
  else if (s == "upol") out = cmd_upol(config);
  else throw ConfigError("unknown subcommand '" + s + "'");

  const std::filesystem::path dir = config.text("out_dir");
  const std::string stem = config.has("name") ? config.text("name") + "_" : "";
  for (const auto& [name, contents] : out.files) write_text_atomic(dir / (stem + name), contents);
  write_text_atomic(dir / (stem + s + "_manifest.json"), manifest_for(config, out).dump(2) + "\n");
  for (const auto& w : out.warnings) std::cerr << "warning: " << w << "\n";
  if (!out.converged) {
    std::cerr << "error: solver did not converge for at least one point (outputs written)\n";
    return kExitConvergence;
  }
  return kExitOk;
}

int run(int argc, char** argv) {
  CLI::App app{"Exciton-photon ladder simulator"};
  std::string config_path, out_dir;
  std::optional<long> seed;
  std::optional<int> threads;
  std::vector<std::string> overrides;
  app.add_option("--config", config_path, "key = value config file or a run manifest (.json)");
  app.add_option("--out-dir", out_dir, "directory for CSV and manifest output");
  app.add_option("--seed", seed, "random seed for iterative solvers");
  app.add_option("--threads", threads, "worker threads for scans");
  app.add_option("-s,--set", overrides, "override a config key (key=value), repeatable");
  app.require_subcommand(0, 1);
  app.fallthrough();
  std::vector<std::string> positional;
  for (const auto& name : kSubcommands) {
    auto* sub = app.add_subcommand(name);
    sub->add_option("assignments", positional, "key=value overrides");
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }
  try {
    RunConfig config;
    if (!config_path.empty()) config = load_config(config_path);
    if (!app.get_subcommands().empty()) config.subcommand = app.get_subcommands().front()->get_name();
    if (config.subcommand.empty()) throw ConfigError("no subcommand given");
    for (const auto& a : overrides) apply_override(config, a);
    for (const auto& a : positional) apply_override(config, a);
    if (!out_dir.empty()) config.set("out_dir", out_dir);
    if (seed) config.set("seed", std::to_string(*seed));
    if (threads) config.set("threads", std::to_string(*threads));
    resolve_defaults(config);
    return execute(config);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const RangeError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const ConvergenceError& e) {
    std::cerr << "convergence error: " << e.what() << "\n";
    return kExitConvergence;
  } catch (const CapacityError& e) {
    std::cerr << "capacity error: " << e.what() << "\n";
    return kExitCapacity;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace polariton::cli
