#include "qbreathe/fock.hpp"

#include <string>

namespace qbreathe::fewbody {

namespace {

std::vector<std::vector<std::size_t>> binomial_table(int rows, int cols) {
  std::vector<std::vector<std::size_t>> b(rows + 1, std::vector<std::size_t>(cols + 1, 0));
  for (int i = 0; i <= rows; ++i) {
    b[i][0] = 1;
    for (int j = 1; j <= std::min(i, cols); ++j)
      b[i][j] = b[i - 1][j - 1] + (i - 1 >= j ? b[i - 1][j] : 0);
  }
  return b;
}

}  // namespace

std::size_t FockBasis::dimension(int n_particles, int n_orbitals) {
  // C(N + M - 1, M - 1); the running product stays integral
  std::size_t dim = 1;
  for (int k = 1; k <= n_orbitals - 1; ++k) {
    if (dim > std::size_t(4e15) / (n_particles + k))
      throw config_error("FockBasis: dimension overflows; reduce n_particles or n_orbitals");
    dim = dim * (n_particles + k) / k;
  }
  return dim;
}

FockBasis::FockBasis(int n_particles, int n_orbitals, std::size_t cap)
    : n_(n_particles), m_(n_orbitals) {
  if (n_ < 1) throw config_error("FockBasis: n_particles must be >= 1");
  if (m_ < 1) throw config_error("FockBasis: n_orbitals must be >= 1");
  if (n_ > 255) throw config_error("FockBasis: n_particles must fit a byte");

  size_ = dimension(n_, m_);
  if (size_ > cap)
    throw config_error(
        "FockBasis: dimension " + std::to_string(size_) + " exceeds cap " +
        std::to_string(cap) + "; reduce n_particles or n_orbitals until "
        "C(N+M-1, M-1) fits");

  binom_ = binomial_table(n_ + m_, m_);

  occ_.resize(size_ * m_);
  Occ cur(m_, 0);
  cur[0] = std::uint8_t(n_);
  std::size_t idx = 0;
  while (true) {
    std::copy(cur.begin(), cur.end(), occ_.begin() + idx * m_);
    ++idx;
    // next composition in lexicographically descending order: find the
    // rightmost position (excluding the last) with a nonzero entry, move one
    // particle right, and flush everything past it back to that slot.
    int p = m_ - 2;
    while (p >= 0 && cur[p] == 0) --p;
    if (p < 0) break;
    cur[p] -= 1;
    int tail = 0;
    for (int q = p + 1; q < m_; ++q) {
      tail += cur[q];
      cur[q] = 0;
    }
    cur[p + 1] = std::uint8_t(tail + 1);
  }
  if (idx != size_)
    throw numeric_error("FockBasis: enumeration produced " + std::to_string(idx) +
                        " states, expected " + std::to_string(size_));
}

std::size_t FockBasis::index_of(const std::uint8_t* occ) const {
  // Count states that precede the given one: for each position, all states
  // sharing the prefix but carrying a larger entry there come first.
  std::size_t rank = 0;
  int remaining = n_;
  for (int pos = 0; pos < m_ - 1; ++pos) {
    const int np = occ[pos];
    // states with entry k > np at pos: compositions of remaining-k over m-pos-1 slots
    for (int k = np + 1; k <= remaining; ++k) {
      const int r = remaining - k;
      const int slots = m_ - pos - 1;
      rank += binom_[r + slots - 1][slots - 1];
    }
    remaining -= np;
  }
  return rank;
}

}  // namespace qbreathe::fewbody
