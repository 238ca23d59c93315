#include "polariton/basis.hpp"

#include <algorithm>
#include <limits>
#include <string>

#include "polariton/error.hpp"

namespace polariton {
namespace {

constexpr int kMaxCap = std::numeric_limits<std::uint8_t>::max();

int resolve_cap(std::optional<int> cap, int particles, const char* name) {
  if (!cap) return particles;
  if (*cap < 1) throw RangeError(std::string(name) + " must be >= 1 or unbounded");
  return *cap;
}

std::uint64_t checked_add(std::uint64_t a, std::uint64_t b) {
  if (a > std::numeric_limits<std::uint64_t>::max() - b) {
    throw CapacityError("basis dimension overflows 64-bit range");
  }
  return a + b;
}

using Wide = __int128;
constexpr Wide kWideLimit = Wide{1} << 100;

// C(n, k) exactly, throwing once it leaves the comfortable __int128 range.
Wide binomial(long n, long k) {
  if (k < 0 || n < k) return 0;
  k = std::min(k, n - k);
  Wide value = 1;
  for (long i = 0; i < k; ++i) {
    value = value * (n - i) / (i + 1);
    if (value > kWideLimit) throw CapacityError("basis dimension overflows 64-bit range");
  }
  return value;
}

// Ways to put n bosons into `modes` modes holding at most `cap` each.
Wide capped_compositions(int modes, int n, int cap) {
  if (n < 0) return 0;
  if (modes == 0) return n == 0 ? 1 : 0;
  Wide total = 0;
  for (long i = 0; i <= modes && i * (cap + 1L) <= n; ++i) {
    const Wide term = binomial(modes, i) * binomial(n - i * (cap + 1L) + modes - 1, modes - 1);
    total += (i % 2 == 0) ? term : -term;
  }
  return total;
}

}  // namespace

FockBasis::FockBasis(int sites, int particles, int species, std::vector<int> caps,
                     std::uint64_t max_dimension)
    : sites_(sites), particles_(particles), species_(species), caps_(std::move(caps)) {
  if (sites < 1) throw RangeError("basis needs at least one site");
  if (particles < 0) throw RangeError("particle number must be non-negative");
  long capacity = 0;
  for (int cap : caps_) {
    if (cap > kMaxCap) throw RangeError("occupation cap above 255 is not supported");
    capacity += static_cast<long>(cap) * sites;
  }
  if (capacity < particles) {
    throw CapacityError("empty sector: L*(cap_photon+cap_exciton) < N");
  }

  const int m = modes();
  completions_.assign(static_cast<std::size_t>(m + 1) * (particles + 1), 0);
  completions_[static_cast<std::size_t>(m) * (particles + 1)] = 1;
  for (int mode = m - 1; mode >= 0; --mode) {
    for (int n = 0; n <= particles; ++n) {
      std::uint64_t ways = 0;
      for (int v = 0; v <= std::min(n, mode_cap(mode)); ++v) {
        ways = checked_add(ways, completions(mode + 1, n - v));
      }
      completions_[static_cast<std::size_t>(mode) * (particles + 1) + n] = ways;
    }
  }
  const std::uint64_t dim = completions(0, particles);
  if (dim > max_dimension) {
    throw CapacityError("basis dimension " + std::to_string(dim) + " exceeds limit " +
                        std::to_string(max_dimension));
  }
  size_ = static_cast<std::size_t>(dim);
  occupations_.reserve(size_ * m);

  // Depth-first walk in ascending lexicographic order.
  std::vector<std::uint8_t> current(m, 0);
  std::vector<int> remaining(m + 1, 0);
  remaining[0] = particles;
  int mode = 0;
  current[0] = 0;
  auto feasible = [&](int p) {
    return completions(p + 1, remaining[p] - current[p]) > 0;
  };
  // Advance `current[p]` to the next feasible value, return false if exhausted.
  auto advance = [&](int p, bool first) {
    int v = first ? 0 : current[p] + 1;
    for (; v <= std::min(remaining[p], mode_cap(p)); ++v) {
      current[p] = static_cast<std::uint8_t>(v);
      if (feasible(p)) return true;
    }
    return false;
  };
  if (!advance(0, true)) return;
  while (true) {
    if (mode == m - 1) {
      occupations_.insert(occupations_.end(), current.begin(), current.end());
      while (mode >= 0 && !advance(mode, false)) --mode;
      if (mode < 0) break;
      continue;
    }
    remaining[mode + 1] = remaining[mode] - current[mode];
    ++mode;
    advance(mode, true);
  }
}

FockBasis FockBasis::ladder(int sites, int particles, std::optional<int> cap_photon,
                            std::optional<int> cap_exciton, std::uint64_t max_dimension) {
  return FockBasis(sites, particles, 2,
                   {resolve_cap(cap_photon, particles, "cap_photon"),
                    resolve_cap(cap_exciton, particles, "cap_exciton")},
                   max_dimension);
}

FockBasis FockBasis::single_species(int sites, int particles, std::optional<int> cap,
                                    std::uint64_t max_dimension) {
  return FockBasis(sites, particles, 1, {resolve_cap(cap, particles, "cap")}, max_dimension);
}

std::optional<std::size_t> FockBasis::find(std::span<const std::uint8_t> occ) const {
  if (occ.size() != static_cast<std::size_t>(modes())) return std::nullopt;
  std::uint64_t index = 0;
  int remaining = particles_;
  for (int p = 0; p < modes(); ++p) {
    const int v = occ[p];
    if (v > mode_cap(p) || v > remaining) return std::nullopt;
    for (int u = 0; u < v; ++u) index += completions(p + 1, remaining - u);
    remaining -= v;
  }
  if (remaining != 0) return std::nullopt;
  return static_cast<std::size_t>(index);
}

std::size_t FockBasis::rank(const OccupationState& state) const {
  const auto expected = static_cast<std::size_t>(sites_);
  const bool shape_ok = state.photon.size() == expected &&
                        state.exciton.size() == (species_ == 2 ? expected : 0);
  std::vector<std::uint8_t> occ;
  occ.reserve(modes());
  bool in_range = shape_ok;
  auto push = [&](const std::vector<int>& counts) {
    for (int c : counts) {
      if (c < 0 || c > kMaxCap) in_range = false;
      occ.push_back(static_cast<std::uint8_t>(std::clamp(c, 0, kMaxCap)));
    }
  };
  push(state.photon);
  push(state.exciton);
  if (in_range) {
    if (auto index = find(occ)) return *index;
  }
  throw NotFoundError("occupation state is not in the basis sector");
}

OccupationState FockBasis::unrank(std::size_t index) const {
  if (index >= size_) throw NotFoundError("ordinal out of range");
  auto occ = occupations(index);
  OccupationState state;
  state.photon.assign(occ.begin(), occ.begin() + sites_);
  if (species_ == 2) state.exciton.assign(occ.begin() + sites_, occ.end());
  return state;
}

FockBasis enumerate_basis(int sites, int particles, std::optional<int> cap_photon,
                          std::optional<int> cap_exciton, std::uint64_t max_dimension) {
  return FockBasis::ladder(sites, particles, cap_photon, cap_exciton, max_dimension);
}

std::size_t rank(const FockBasis& basis, const OccupationState& state) {
  return basis.rank(state);
}

OccupationState unrank(const FockBasis& basis, std::size_t ordinal) {
  return basis.unrank(ordinal);
}

std::uint64_t dimension(int sites, int particles, std::optional<int> cap_photon,
                        std::optional<int> cap_exciton, std::uint64_t max_dimension) {
  if (sites < 1) throw RangeError("basis needs at least one site");
  if (particles < 0) throw RangeError("particle number must be non-negative");
  const int cp = resolve_cap(cap_photon, particles, "cap_photon");
  const int cx = resolve_cap(cap_exciton, particles, "cap_exciton");
  Wide total = 0;
  for (int k = 0; k <= particles; ++k) {
    total += capped_compositions(sites, k, cp) * capped_compositions(sites, particles - k, cx);
    if (total > kWideLimit) throw CapacityError("basis dimension overflows 64-bit range");
  }
  if (total > static_cast<Wide>(std::numeric_limits<std::uint64_t>::max()) ||
      static_cast<std::uint64_t>(total) > max_dimension) {
    throw CapacityError("basis dimension exceeds limit");
  }
  return static_cast<std::uint64_t>(total);
}

}  // namespace polariton
