#pragma once

// Genus-2 surface group of the regular hyperbolic octagon with opposite
// sides identified.  Side pairings are g_k = Rot(k pi/4) T Rot(-k pi/4)
// where T translates by 2 arccosh(1+sqrt2) along the real axis; the
// relation word is derived from the corner cycle rather than transcribed.

#include <array>
#include <cstdint>
#include <deque>
#include <unordered_map>
#include <vector>

#include "teichlab/hyperbolic.hpp"

namespace teichlab {

inline double bolza_half_systole() { return std::acosh(1.0 + std::sqrt(2.0)); }
inline double bolza_systole() { return 2.0 * bolza_half_systole(); }

/// Circumradius of the octagon (hyperbolic): arccosh(3 + 2 sqrt2).
inline double octagon_vertex_distance() { return std::acosh(3.0 + 2.0 * std::sqrt(2.0)); }

/// Euclidean radius of the octagon vertices: 2^{-1/4}.
inline double octagon_vertex_radius() { return std::pow(2.0, -0.25); }

/// Euclidean radius of the side midpoints: sqrt(sqrt2 - 1).
inline double octagon_edge_radius() { return std::sqrt(std::sqrt(2.0) - 1.0); }

/// The regular octagon as a Dirichlet domain.  Vertices sit at angles
/// (2j+1) pi/8; side s_k runs from V_{k-1} to V_k with its midpoint on the
/// ray of angle k pi/4.  A point is inside iff it lies outside all eight
/// side circles (each orthogonal to the unit circle).
struct FundamentalOctagon {
  std::array<Complex, 8> vertices;
  std::array<Complex, 8> edge_midpoints;  // midpoint of side s_k
  double side_circle_center_radius;       // distance of circle centers from 0
  double side_circle_radius;

  FundamentalOctagon() {
    const double rv = octagon_vertex_radius();
    const double rm = octagon_edge_radius();
    for (int j = 0; j < 8; ++j) {
      vertices[j] = std::polar(rv, (2.0 * j + 1.0) * kPi / 8.0);
      edge_midpoints[j] = std::polar(rm, j * kPi / 4.0);
    }
    side_circle_center_radius = (1.0 + rm * rm) / (2.0 * rm);
    side_circle_radius = side_circle_center_radius - rm;
  }

  bool contains(const Complex& v, double tol = 1e-12) const {
    if (std::abs(v) >= 1.0) return false;
    for (int k = 0; k < 8; ++k) {
      const Complex c = std::polar(side_circle_center_radius, k * kPi / 4.0);
      if (std::abs(v - c) < side_circle_radius - tol) return false;
    }
    return true;
  }

  /// Exact hyperbolic area by Gauss-Bonnet: 6 pi - 8 * (pi/4) = 4 pi.
  static double area() { return 4.0 * kPi; }
};

/// Octagon side pairings of the Bolza surface plus derived combinatorics.
struct SurfaceGroup {
  std::array<MobiusTransform, 8> generators;  // g_{k+4} = g_k^{-1}
  int genus = 2;
  FundamentalOctagon octagon;
  std::vector<int> relation_word;              // corner cycle, length 8
  std::array<std::vector<int>, 8> corner_words;  // V_j = word_j(V_0)

  const MobiusTransform& gen(int k) const { return generators[((k % 8) + 8) % 8]; }
  static int inverse_index(int k) { return (k + 4) % 8; }

  /// Side paired with side k, and the transform carrying it there:
  /// g_k maps side (k+4) onto side k.
  std::pair<int, MobiusTransform> pairing(int k) const {
    return {inverse_index(k), generators[k]};
  }

  Complex apply_word(const std::vector<int>& word, Complex v) const {
    for (auto it = word.rbegin(); it != word.rend(); ++it) v = generators[*it].apply(v);
    return v;
  }

  MobiusTransform word_to_mobius(const std::vector<int>& word) const {
    MobiusTransform g = MobiusTransform::identity();
    for (int k : word) g = compose(g, generators[k]);
    return g;
  }

  /// Signed generator counts of a word (indices mod 4), i.e. its image in
  /// the abelianization; used for flat-torus period shifts.
  static std::array<int, 4> word_abelianized(const std::vector<int>& word) {
    std::array<int, 4> counts{0, 0, 0, 0};
    for (int k : word) counts[k % 4] += (k < 4) ? 1 : -1;
    return counts;
  }

  double relation_residual() const {
    return mobius_distance(word_to_mobius(relation_word), MobiusTransform::identity());
  }
};

inline SurfaceGroup bolza_group() {
  SurfaceGroup G;
  // Conjugating T by the rotation of angle k pi/4 for k = 0..7 gives all
  // eight pairings at once: rotation by pi turns T into T^{-1}, so
  // g_{k+4} = g_k^{-1} holds automatically.
  const MobiusTransform T = MobiusTransform::axis_translation(bolza_systole());
  for (int k = 0; k < 8; ++k) {
    const MobiusTransform R = MobiusTransform::rotation(k * kPi / 4.0);
    G.generators[k] = compose(compose(R, T), R.inverse()).normalized();
  }

  // Corner cycle: stand at vertex j between sides s_j and s_{j+1}, leave
  // across side e; the neighbouring copy is current * g_e and the vertex
  // corresponds to the preimage of V_j under g_e.  Eight corners of angle
  // pi/4 close up the cycle and the accumulated word is the relation.
  int j = 0, e = 0;
  std::vector<int> word;
  MobiusTransform gamma = MobiusTransform::identity();
  std::array<std::vector<int>, 8> corner_words;
  do {
    word.push_back(e);
    gamma = compose(gamma, G.generators[e]).normalized();
    int jnext = -1;
    double best = 1e9;
    for (int k = 0; k < 8; ++k) {
      const double d = std::abs(G.generators[e].apply(G.octagon.vertices[k]) -
                                G.octagon.vertices[j]);
      if (d < best) {
        best = d;
        jnext = k;
      }
    }
    if (best > 1e-9) throw Error(ErrorCode::non_convergence, "corner walk lost the vertex orbit");
    const int entered = SurfaceGroup::inverse_index(e);
    j = jnext;
    e = (entered == j) ? (j + 1) % 8 : j;
    if (j != 0 && corner_words[j].empty()) {
      // V_j = gamma^{-1} V_0: reversed word of inverses.
      std::vector<int> w;
      for (auto it = word.rbegin(); it != word.rend(); ++it)
        w.push_back(SurfaceGroup::inverse_index(*it));
      corner_words[j] = std::move(w);
    }
  } while (!(j == 0 && e == 0) && word.size() < 64);

  if (word.size() != 8) throw Error(ErrorCode::non_convergence, "corner cycle has wrong length");
  G.relation_word = std::move(word);
  G.corner_words = std::move(corner_words);
  if (G.relation_residual() > 1e-10)
    throw Error(ErrorCode::non_convergence, "surface group relation residual too large");
  for (int v = 1; v < 8; ++v) {
    if (std::abs(G.apply_word(G.corner_words[v], G.octagon.vertices[0]) -
                 G.octagon.vertices[v]) > 1e-10)
      throw Error(ErrorCode::non_convergence, "corner word mismatch");
  }
  return G;
}

/// Deduplicated ball { gamma : d(0, gamma 0) <= R }, sorted by distance
/// then by a canonical key, for truncating Poincare series.
struct GroupBall {
  std::vector<MobiusTransform> elements;
  std::vector<double> distances;  // d(0, gamma 0), same order
  double radius = 0.0;

  std::size_t size() const { return elements.size(); }

  /// First index with distance > r (elements are sorted by distance).
  std::size_t count_within(double r) const {
    return std::upper_bound(distances.begin(), distances.end(), r) - distances.begin();
  }
};

namespace detail {

inline MobiusTransform canonical_sign(const MobiusTransform& g) {
  const std::array<double, 4> comps{g.a.real(), g.a.imag(), g.b.real(), g.b.imag()};
  for (double c : comps) {
    if (std::abs(c) > 1e-6) {
      if (c < 0.0) return {-g.a, -g.b};
      return g;
    }
  }
  return g;
}

struct BallKey {
  std::int64_t k[4];
  bool operator==(const BallKey& o) const {
    return k[0] == o.k[0] && k[1] == o.k[1] && k[2] == o.k[2] && k[3] == o.k[3];
  }
};

struct BallKeyHash {
  std::size_t operator()(const BallKey& key) const {
    std::uint64_t h = 1469598103934665603ULL;
    for (int i = 0; i < 4; ++i) {
      h ^= static_cast<std::uint64_t>(key.k[i]);
      h *= 1099511628211ULL;
    }
    return static_cast<std::size_t>(h);
  }
};

constexpr double kBallQuantum = 1e-6;

inline BallKey ball_round_key(const MobiusTransform& g) {
  BallKey key;
  const std::array<double, 4> c{g.a.real(), g.a.imag(), g.b.real(), g.b.imag()};
  for (int i = 0; i < 4; ++i) key.k[i] = std::llround(c[i] / kBallQuantum);
  return key;
}

}  // namespace detail

/// Breadth-first closure over the symmetric generator set.  The frontier is
/// pruned at R plus the octagon circumradius, which keeps every generator
/// chain toward the kept set inside the explored set; results are then
/// filtered to d(0, gamma 0) <= R.
inline GroupBall enumerate_ball(const SurfaceGroup& G, double R,
                                std::size_t budget = 2000000) {
  if (R <= 0.0) throw Error(ErrorCode::invalid_argument, "ball radius must be positive");
  const double expand_R = R + octagon_vertex_distance() + 1e-9;

  std::vector<MobiusTransform> explored;
  std::unordered_map<detail::BallKey, std::vector<std::uint32_t>, detail::BallKeyHash> index;

  auto find_duplicate = [&](const MobiusTransform& cg) {
    const std::array<double, 4> c{cg.a.real(), cg.a.imag(), cg.b.real(), cg.b.imag()};
    std::int64_t lo[4], hi[4];
    for (int i = 0; i < 4; ++i) {
      lo[i] = static_cast<std::int64_t>(std::floor(c[i] / detail::kBallQuantum));
      hi[i] = static_cast<std::int64_t>(std::ceil(c[i] / detail::kBallQuantum));
    }
    for (int m = 0; m < 16; ++m) {
      detail::BallKey key{{(m & 1) ? hi[0] : lo[0], (m & 2) ? hi[1] : lo[1],
                           (m & 4) ? hi[2] : lo[2], (m & 8) ? hi[3] : lo[3]}};
      auto it = index.find(key);
      if (it == index.end()) continue;
      for (std::uint32_t idx : it->second)
        if (mobius_distance(explored[idx], cg) < 1e-8) return true;
    }
    return false;
  };

  auto insert = [&](const MobiusTransform& g) {
    const MobiusTransform cg = detail::canonical_sign(g);
    if (find_duplicate(cg)) return false;
    explored.push_back(cg);
    index[detail::ball_round_key(cg)].push_back(
        static_cast<std::uint32_t>(explored.size() - 1));
    return true;
  };

  insert(MobiusTransform::identity());
  std::deque<std::uint32_t> frontier{0};
  while (!frontier.empty()) {
    const MobiusTransform g = explored[frontier.front()];
    frontier.pop_front();
    for (int k = 0; k < 8; ++k) {
      // No per-step renormalization: determinants are multiplicative, so the
      // drift stays at rounding level, while renormalizing would inject
      // cancellation noise of order |a|^2 eps into every entry and scatter
      // representations of the same element beyond the dedup tolerance.
      const MobiusTransform next = compose(g, G.generators[k]);
      const double d = hyperbolic_distance(Complex(0, 0), next.apply(Complex(0, 0)));
      if (d > expand_R) continue;
      if (explored.size() >= budget)
        throw Error(ErrorCode::budget_exceeded, "group ball exceeds element budget");
      if (insert(next)) frontier.push_back(static_cast<std::uint32_t>(explored.size() - 1));
    }
  }

  struct Entry {
    MobiusTransform g;
    double d;
  };
  std::vector<Entry> kept;
  kept.reserve(explored.size());
  for (const auto& g : explored) {
    const double d = hyperbolic_distance(Complex(0, 0), g.apply(Complex(0, 0)));
    if (d <= R + 1e-9) kept.push_back({g, d});
  }
  std::sort(kept.begin(), kept.end(), [](const Entry& x, const Entry& y) {
    if (x.d != y.d) return x.d < y.d;
    const std::array<double, 4> a{x.g.a.real(), x.g.a.imag(), x.g.b.real(), x.g.b.imag()};
    const std::array<double, 4> b{y.g.a.real(), y.g.a.imag(), y.g.b.real(), y.g.b.imag()};
    return a < b;
  });

  GroupBall ball;
  ball.radius = R;
  ball.elements.reserve(kept.size());
  ball.distances.reserve(kept.size());
  for (const auto& e : kept) {
    ball.elements.push_back(e.g);
    ball.distances.push_back(e.d);
  }
  return ball;
}

/// Reduce v into the closed fundamental octagon by greedy distance descent.
/// Returns the domain representative p and a word with word(p) = v.
inline std::pair<Complex, std::vector<int>> reduce_to_domain(const SurfaceGroup& G,
                                                             Complex v) {
  if (std::abs(v) >= 1.0)
    throw Error(ErrorCode::invalid_argument, "point outside the open disk");
  std::vector<int> inverse_steps;
  for (int iter = 0; iter < 4096; ++iter) {
    if (G.octagon.contains(v, -1e-11)) break;
    int best_k = -1;
    double best_d = hyperbolic_distance(Complex(0, 0), v) - 1e-14;
    for (int k = 0; k < 8; ++k) {
      const Complex w = G.generators[k].apply(v);
      const double d = hyperbolic_distance(Complex(0, 0), w);
      if (d < best_d) {
        best_d = d;
        best_k = k;
      }
    }
    if (best_k < 0) {
      if (G.octagon.contains(v, -1e-8)) break;
      throw Error(ErrorCode::non_convergence, "greedy reduction stalled");
    }
    v = G.generators[best_k].apply(v);
    inverse_steps.push_back(best_k);
  }
  if (!G.octagon.contains(v, -1e-8))
    throw Error(ErrorCode::non_convergence, "reduction did not reach the octagon");
  // v_original = g_{j1}^{-1}( g_{j2}^{-1}( ... (p) ) ) for steps j1..jT, so
  // the word (outermost first) is the inverted steps in original order.
  std::vector<int> word;
  for (int k : inverse_steps) word.push_back(SurfaceGroup::inverse_index(k));
  return {v, word};
}

}  // namespace teichlab
