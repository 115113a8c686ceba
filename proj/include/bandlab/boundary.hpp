#pragma once

#include <algorithm>
#include <cstddef>
#include <limits>
#include <string_view>
#include <vector>

#include "bandlab/errors.hpp"
#include "bandlab/metric_core.hpp"

namespace bandlab {

// Finite-N surrogates for sequences converging to infinity: the liminf of
// Gromov products is replaced by a minimum over a tail window.

/// min over the last `window` indices i, j of (x^i . y^j)_base.
template <class P, class Dist>
double tail_gromov_min(const std::vector<P>& seq1, const std::vector<P>& seq2, const P& base, std::size_t window,
                       Dist&& dist) {
  if (seq1.size() != seq2.size()) throw Error(ErrorKind::LengthMismatch, "sequences differ in length");
  if (window < 2) throw Error(ErrorKind::WindowTooLarge, "window must be at least 2");
  if (window > seq1.size()) throw Error(ErrorKind::WindowTooLarge, "window exceeds sequence length");
  const std::size_t first = seq1.size() - window;
  std::vector<double> to_base2(window);
  for (std::size_t j = 0; j < window; ++j) to_base2[j] = dist(seq2[first + j], base);
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = first; i < seq1.size(); ++i) {
    const double di = dist(seq1[i], base);
    for (std::size_t j = 0; j < window; ++j) {
      best = std::min(best, gromov_product(di, to_base2[j], dist(seq1[i], seq2[first + j])));
    }
  }
  return best;
}

enum class Verdict { converges, diverges_below_threshold };

inline std::string_view to_string(Verdict v) {
  return v == Verdict::converges ? "converges" : "diverges-below-threshold";
}

struct ProbeVerdict {
  double min_tail_product = 0.0;
  Verdict verdict = Verdict::diverges_below_threshold;
  std::size_t window = 0;
  double threshold = 0.0;
};

struct ClassProbe {
  ProbeVerdict first;
  ProbeVerdict second;
  double cross_tail_min = 0.0;
  bool equivalent = false;
};

template <class P, class Dist>
ProbeVerdict probe_sequence(const std::vector<P>& seq, const P& base, std::size_t window, double threshold,
                            Dist&& dist) {
  ProbeVerdict v;
  v.min_tail_product = tail_gromov_min(seq, seq, base, window, dist);
  v.verdict = v.min_tail_product > threshold ? Verdict::converges : Verdict::diverges_below_threshold;
  v.window = window;
  v.threshold = threshold;
  return v;
}

/// Classifies each sequence (self tail minimum above the threshold means
/// "converges") and flags equivalence when both converge and the cross tail
/// minimum is above the threshold too.
template <class P, class Dist>
ClassProbe class_probe(const std::vector<P>& seq1, const std::vector<P>& seq2, const P& base, std::size_t window,
                       double threshold, Dist&& dist) {
  ClassProbe out;
  out.first = probe_sequence(seq1, base, window, threshold, dist);
  out.second = probe_sequence(seq2, base, window, threshold, dist);
  out.cross_tail_min = tail_gromov_min(seq1, seq2, base, window, dist);
  out.equivalent = out.first.verdict == Verdict::converges && out.second.verdict == Verdict::converges &&
                   out.cross_tail_min > threshold;
  return out;
}

}  // namespace bandlab
