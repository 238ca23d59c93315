#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace polariton {

/// Occupation numbers of one basis state. Single-species bases store the
/// boson counts in `photon` and leave `exciton` empty.
struct OccupationState {
  std::vector<int> photon;
  std::vector<int> exciton;

  auto operator<=>(const OccupationState&) const = default;
  bool operator==(const OccupationState&) const = default;
};

/// Dimension above which basis construction is refused.
inline constexpr std::uint64_t kDefaultMaxDimension = 20'000'000;

/// Number-conserving bosonic Fock space on L rungs.
///
/// Modes are laid out as (photon_0..photon_{L-1}, exciton_0..exciton_{L-1});
/// states are sorted lexicographically on that concatenated count vector and
/// ranked combinatorially, so rank/unrank never touch a hash table.
class FockBasis {
 public:
  /// Two-species ladder basis. `std::nullopt` caps mean unbounded (cap = N).
  static FockBasis ladder(int sites, int particles, std::optional<int> cap_photon,
                          std::optional<int> cap_exciton,
                          std::uint64_t max_dimension = kDefaultMaxDimension);

  /// One boson flavour per site (effective lower-polariton chain).
  static FockBasis single_species(int sites, int particles, std::optional<int> cap,
                                  std::uint64_t max_dimension = kDefaultMaxDimension);

  int sites() const { return sites_; }
  int particles() const { return particles_; }
  int species() const { return species_; }
  int modes() const { return sites_ * species_; }
  int cap_photon() const { return caps_.front(); }
  /// Zero for single-species bases.
  int cap_exciton() const { return species_ == 2 ? caps_.back() : 0; }
  std::size_t size() const { return size_; }

  /// Raw occupation numbers of state `index` in mode layout.
  std::span<const std::uint8_t> occupations(std::size_t index) const {
    return {occupations_.data() + index * static_cast<std::size_t>(modes()),
            static_cast<std::size_t>(modes())};
  }
  int photons(std::size_t index, int site) const { return occupations(index)[site]; }
  int excitons(std::size_t index, int site) const {
    return occupations(index)[sites_ + site];
  }

  OccupationState unrank(std::size_t index) const;
  std::size_t rank(const OccupationState& state) const;

  /// Rank of a raw occupation vector, or nullopt if it lies outside the sector.
  std::optional<std::size_t> find(std::span<const std::uint8_t> occupations) const;

 private:
  FockBasis(int sites, int particles, int species, std::vector<int> caps,
            std::uint64_t max_dimension);

  int sites_ = 0;
  int particles_ = 0;
  int species_ = 0;
  std::vector<int> caps_;  // per species
  std::size_t size_ = 0;
  // completions_[p * (N + 1) + n]: ways to place n bosons on modes p..M-1.
  std::vector<std::uint64_t> completions_;
  std::vector<std::uint8_t> occupations_;

  int mode_cap(int mode) const { return caps_[mode / sites_]; }
  std::uint64_t completions(int mode, int n) const {
    return completions_[static_cast<std::size_t>(mode) * (particles_ + 1) + n];
  }
};

FockBasis enumerate_basis(int sites, int particles, std::optional<int> cap_photon,
                          std::optional<int> cap_exciton,
                          std::uint64_t max_dimension = kDefaultMaxDimension);

std::size_t rank(const FockBasis& basis, const OccupationState& state);
OccupationState unrank(const FockBasis& basis, std::size_t ordinal);

/// Sector dimension from capped stars-and-bars counts, convolved over the
/// photon/exciton split. Throws CapacityError when it exceeds `max_dimension`.
std::uint64_t dimension(int sites, int particles, std::optional<int> cap_photon,
                        std::optional<int> cap_exciton,
                        std::uint64_t max_dimension = UINT64_MAX);

}  // namespace polariton
