#pragma once

#include <cstdint>
#include <vector>

#include "qbreathe/common.hpp"

namespace qbreathe::fewbody {

// Bosonic occupation-number basis over M orbitals at fixed particle number:
// all (n_0,...,n_{M-1}) with sum n_i = N, enumerated in lexicographically
// descending order, so (N,0,...,0) comes first.  Index <-> state maps are
// combinatorial (no hashing), hence deterministic.
class FockBasis {
 public:
  using Occ = std::vector<std::uint8_t>;

  static constexpr std::size_t kDefaultCap = 2'000'000;

  FockBasis(int n_particles, int n_orbitals, std::size_t cap = kDefaultCap);

  int n_particles() const { return n_; }
  int n_orbitals() const { return m_; }
  std::size_t size() const { return size_; }

  // occupation vector of basis state i
  const std::uint8_t* state(std::size_t i) const { return &occ_[i * m_]; }
  Occ state_vector(std::size_t i) const {
    return Occ(state(i), state(i) + m_);
  }

  // rank of an occupation vector in the enumeration
  std::size_t index_of(const std::uint8_t* occ) const;
  std::size_t index_of(const Occ& occ) const { return index_of(occ.data()); }

  static std::size_t dimension(int n_particles, int n_orbitals);

 private:
  int n_ = 0;
  int m_ = 0;
  std::size_t size_ = 0;
  std::vector<std::uint8_t> occ_;                  // size_ * m_
  std::vector<std::vector<std::size_t>> binom_;    // binomial table
};

}  // namespace qbreathe::fewbody
