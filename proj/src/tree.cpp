#include "bergman/tree.hpp"

#include <algorithm>
#include <boost/math/special_functions/beta.hpp>
#include <cmath>
#include <json.hpp>
#include <map>
#include <ostream>
#include <random>

namespace bergman {

namespace {

constexpr double kTwoPi = 2.0 * M_PI;

double angle_of(complexd z) {
  double t = std::atan2(z.imag(), z.real());
  if (t < 0) t += kTwoPi;
  return t;
}

// Deterministic uniform directions on the unit sphere of C^n (Box-Muller on
// raw mt19937_64 output, independent of library distribution internals).
struct DirSampler {
  std::mt19937_64 rng;
  explicit DirSampler(std::uint64_t seed) : rng(seed) {}

  double unif() { return double(rng() >> 11) * 0x1.0p-53; }

  Point direction(int n) {
    Point z(n);
    double s = 0.0;
    for (int i = 0; i < n; ++i) {
      const double u1 = std::max(unif(), 1e-300);
      const double u2 = unif();
      const double r = std::sqrt(-2.0 * std::log(u1));
      z[i] = complexd(r * std::cos(kTwoPi * u2), r * std::sin(kTwoPi * u2));
      s += std::norm(z[i]);
    }
    const double inv = 1.0 / std::sqrt(s);
    for (auto& c : z) c *= inv;
    return z;
  }
};

std::uint64_t level_seed(std::uint64_t base, int N, std::uint64_t salt) {
  return base ^ (0x9e3779b97f4a7c15ULL * std::uint64_t(N + 1) + salt);
}

int arc_count(const TreeConfig& cfg, int N) {
  const double circ = M_PI * std::sinh(2.0 * cfg.lambda * N);
  if (cfg.mode == TreeMode::Dyadic) {
    const int k = std::max(1, int(std::floor(std::log2(
                         std::sinh(2.0 * cfg.lambda * N) / cfg.lambda))));
    return 1 << k;
  }
  int J = std::max(1, int(std::floor(circ / (cfg.net_slack * cfg.lambda))));
  const double s = std::tanh(cfg.lambda * N);
  while (J > 1) {
    const complexd a(s, 0.0);
    const complexd b = s * std::exp(complexd(0.0, kTwoPi / J));
    if (bergman_distance1(a, b) >= cfg.lambda) break;
    --J;
  }
  return J;
}

std::vector<Point> net_n1(const TreeConfig& cfg, int N) {
  const int J = arc_count(cfg, N);
  const double s = std::tanh(cfg.lambda * N);
  std::vector<Point> anchors;
  anchors.reserve(J);
  for (int j = 0; j < J; ++j) {
    const double th = kTwoPi * (j + 0.5) / J;
    anchors.push_back(Point{s * std::exp(complexd(0.0, th))});
  }
  return anchors;
}

// On the shell |z| = |w| = s the Bergman distance is a strictly increasing
// function of |1 - <z,w>|, and d(z,w) >= lambda iff
// |1 - <z,w>| >= (1 - s^2) cosh(lambda). Comparing squared gaps against that
// threshold replaces atanh/sqrt per pair with one hermitian dot product.
double shell_gap_sq(const Point& z, const Point& w) {
  return std::norm(1.0 - herm_dot(z, w));
}

std::vector<Point> greedy_net(const TreeConfig& cfg, int N, int prev_count) {
  const double s = std::tanh(cfg.lambda * N);
  // Level-count model: a lambda-net on the shell of radius s scales like
  // (s / (1 - s^2))^(2n-1), the reciprocal angular spacing to the 2n-1 real
  // sphere dimensions. The exp(2 n lambda) asymptotic only holds deep; the
  // ratio form tracks the much faster shallow growth as well.
  double expected = 64.0;
  if (N >= 2 && prev_count > 0) {
    const double sp = std::tanh(cfg.lambda * (N - 1));
    const double rn = s / (1.0 - s * s);
    const double rp = sp / (1.0 - sp * sp);
    expected = prev_count * std::pow(rn / rp, 2.0 * cfg.n - 1.0) * 1.3 + 8.0;
  }
  // ~16x head-room over the expected count: late adoptions reset the
  // certification run below, and each reset costs another run of probes.
  const long budget = std::clamp(
      std::lround(16.0 * cfg.pool_factor * expected), 32L, 80000000L);

  const double thr_sq =
      std::pow((1.0 - s * s) * std::cosh(cfg.lambda), 2);
  std::vector<Point> anchors;
  auto try_accept = [&](Point&& z) {
    for (const Point& a : anchors)
      if (shell_gap_sq(z, a) < thr_sq) return false;
    anchors.push_back(std::move(z));
    return true;
  };

  // Sequential adsorption with built-in certification: every probe is either
  // lambda-covered by an existing anchor or becomes one (separation is then
  // automatic), so the net is maximal once a long run of consecutive probes
  // all land covered. The run length scales with the net so the residual
  // uncovered fraction it certifies is a fixed multiple of one cell.
  DirSampler ds(level_seed(cfg.seed, N, 0x1234));
  long covered_run = 0;
  for (long p = 0; p < budget; ++p) {
    Point z = ds.direction(cfg.n);
    for (auto& c : z) c *= s;
    if (try_accept(std::move(z))) {
      covered_run = 0;
    } else {
      ++covered_run;
      const long need =
          std::clamp(8 * long(anchors.size()), 4000L, 400000L);
      if (covered_run >= need) return anchors;
    }
  }
  throw ResolutionError(
      "sphere net covering could not be certified at radius lambda; "
      "raise pool_factor");
}

Point origin_point(int n) { return Point(n, complexd(0.0, 0.0)); }

}  // namespace

double BergmanTree::level_u1(int N) const {
  const double t = std::tanh(cfg.lambda * N);
  return t * t;
}

double BergmanTree::level_u2(int N) const {
  const double t = std::tanh(cfg.lambda * (N + 1));
  return t * t;
}

PolarBox BergmanTree::cell_box(int id) const {
  if (cfg.n != 1) throw std::domain_error("cell_box: n = 1 only");
  const TreeNode& a = node(id);
  return PolarBox{level_u1(a.level), level_u2(a.level), a.th1, a.th2};
}

Region BergmanTree::cell_region(int id) const {
  if (cfg.n == 1) return Region::polar_boxes({cell_box(id)});
  const TreeNode& a = node(id);
  const double eps = 1.0 - std::tanh(cfg.lambda * (a.level + 1));
  const BergmanTree* self = this;
  return Region::membership(
      [self, id](const Point& z) {
        try {
          return locate_cell(*self, z) == id;
        } catch (const OutOfDepthError&) {
          return false;
        }
      },
      eps);
}

std::vector<Point> build_sphere_net(const TreeConfig& cfg, int N) {
  if (N < 1) throw std::domain_error("build_sphere_net: N >= 1");
  if (cfg.n == 1) return net_n1(cfg, N);
  int prev = 0;
  std::vector<Point> anchors;
  for (int M = 1; M <= N; ++M) {
    anchors = greedy_net(cfg, M, prev);
    prev = int(anchors.size());
  }
  return anchors;
}

BergmanTree build_tree(const TreeConfig& cfg) {
  if (cfg.n < 1) throw std::domain_error("build_tree: n >= 1");
  if (!(cfg.lambda > 0.0)) throw std::domain_error("build_tree: lambda > 0");
  if (cfg.depth < 1) throw std::domain_error("build_tree: depth >= 1");
  if (cfg.mode == TreeMode::Dyadic && cfg.n != 1)
    throw std::domain_error("build_tree: dyadic mode requires n = 1");

  BergmanTree tree;
  tree.cfg = cfg;

  TreeNode root;
  root.id = 0;
  root.level = 0;
  root.index = 0;
  root.parent = -1;
  root.anchor = origin_point(cfg.n);
  root.center = origin_point(cfg.n);
  root.th1 = 0.0;
  root.th2 = kTwoPi;
  tree.nodes.push_back(root);
  tree.levels.assign(cfg.depth + 1, {});
  tree.levels[0] = {0};

  for (int N = 1; N <= cfg.depth; ++N) {
    std::vector<Point> anchors =
        cfg.n == 1 ? net_n1(cfg, N)
                   : greedy_net(cfg, N, int(tree.levels[N - 1].size()));
    const int J = int(anchors.size());
    for (int j = 0; j < J; ++j) {
      TreeNode nd;
      nd.id = int(tree.nodes.size());
      nd.level = N;
      nd.index = j;
      nd.anchor = anchors[j];
      nd.center = radial_project(anchors[j], cfg.lambda * (N + 0.5));
      if (cfg.n == 1) {
        nd.th1 = kTwoPi * j / J;
        nd.th2 = kTwoPi * (j + 1) / J;
      }
      const int pj = locate_direction(tree, N - 1, nd.center);  // unit scaling inside
      nd.parent = tree.levels[N - 1][pj];
      tree.nodes[nd.parent].children.push_back(nd.id);
      tree.levels[N].push_back(nd.id);
      tree.nodes.push_back(std::move(nd));
    }
  }

  if (cfg.n >= 2) {
    tree.samples.assign(tree.nodes.size(), {});
    tree.level_sample_count.assign(cfg.depth + 1, 0);
    for (int N = 1; N <= cfg.depth; ++N) {
      const long J = long(tree.levels[N].size());
      const long S = std::max(200L, long(cfg.samples_per_node) * J);
      tree.level_sample_count[N] = S;
      const double u1 = tree.level_u1(N), u2 = tree.level_u2(N);
      DirSampler ds(level_seed(cfg.seed, N, 0xabcd));
      for (long i = 0; i < S; ++i) {
        // v_0 radial law: cdf of u = |z|^2 on the shell is proportional to u^n
        const double t = std::pow(u1, cfg.n) +
                         ds.unif() * (std::pow(u2, cfg.n) - std::pow(u1, cfg.n));
        const double u = std::pow(t, 1.0 / cfg.n);
        Point z = ds.direction(cfg.n);
        const double r = std::sqrt(u);
        for (auto& c : z) c *= r;
        const int j = locate_direction(tree, N, z);
        tree.samples[tree.levels[N][j]].push_back(std::move(z));
      }
    }
  }
  return tree;
}

int locate_direction(const BergmanTree& tree, int level, const Point& dir) {
  if (level == 0) return 0;
  if (tree.cfg.n == 1) {
    const int J = int(tree.levels[level].size());
    const double th = angle_of(dir[0]);
    return std::min(J - 1, int(th / (kTwoPi / J)));
  }
  const double dn = norm(dir);
  const auto shell_point = [&](int L) {
    const double s = std::tanh(tree.cfg.lambda * L);
    Point w(dir);
    for (auto& c : w) c *= s / dn;
    return w;
  };
  // On a fixed shell the squared gap |1 - <w,a>|^2 orders anchors exactly as
  // the Bergman distance does, so argmin searches never need atanh.
  const auto& ids = tree.levels[level];
  if (ids.size() <= 128) {
    const Point w = shell_point(level);
    int best = 0;
    double bg = 1e300;
    for (size_t j = 0; j < ids.size(); ++j) {
      const double g = shell_gap_sq(w, tree.node(ids[j]).anchor);
      if (g < bg) {
        bg = g;
        best = int(j);
      }
    }
    return best;
  }
  // Coarse-to-fine descent: keep the anchors within ~4.5 lambda of the radial
  // projection at each level and recurse into their children. Covering radius
  // lambda per level plus same-shell contraction under inward projection keeps
  // the nearest anchor's ancestor chain inside that window, so the result
  // matches the direct scan while touching O(fan * level) anchors.
  std::vector<int> cand = tree.levels[1];
  for (int L = 1;; ++L) {
    const Point w = shell_point(L);
    const double s = std::tanh(tree.cfg.lambda * L);
    const double thr = (1.0 - s * s) * std::cosh(4.5 * tree.cfg.lambda);
    const double thr_sq = thr * thr;
    int best = cand.front();
    double bg = 1e300;
    std::vector<std::pair<double, int>> kept;
    for (int id : cand) {
      const double g = shell_gap_sq(w, tree.node(id).anchor);
      if (g < bg) {
        bg = g;
        best = id;
      }
      if (g <= thr_sq) kept.emplace_back(g, id);
    }
    if (L == level) return tree.node(best).index;
    constexpr size_t kFan = 96;
    if (kept.size() > kFan) {
      std::nth_element(kept.begin(), kept.begin() + kFan, kept.end());
      kept.resize(kFan);
    }
    if (std::none_of(kept.begin(), kept.end(),
                     [&](const auto& e) { return e.second == best; }))
      kept.emplace_back(bg, best);
    cand.clear();
    for (const auto& [g, id] : kept)
      for (int ch : tree.node(id).children) cand.push_back(ch);
    if (cand.empty()) cand = tree.levels[L + 1];  // childless window: rescan
  }
}

int locate_cell(const BergmanTree& tree, const Point& z) {
  const double r = norm(z);
  if (!(r < 1.0)) throw OutOfDepthError("locate_cell: point outside the ball");
  if (r == 0.0) return tree.root_id();
  const double d0 = std::atanh(r);
  const int lvl = std::max(0, int(std::floor(d0 / tree.cfg.lambda)));
  if (lvl > tree.cfg.depth)
    throw OutOfDepthError("locate_cell: point beyond tree depth");
  if (lvl == 0) return tree.root_id();
  return tree.levels[lvl][locate_direction(tree, lvl, z)];
}

// --------------------------------------------------------------- neighbors

namespace {

// Min Bergman distance from a point to a cell, estimated from cell geometry:
// exact box-face grids for n = 1, cached shell samples for n >= 2.
double cell_min_dist(const BergmanTree& tree, int id, const Point& p) {
  const TreeNode& nd = tree.node(id);
  double best = bergman_distance(p, nd.center);
  if (tree.cfg.n == 1) {
    const PolarBox b = tree.cell_box(id);
    const int G = 12;
    const complexd pz = p[0];
    for (int i = 0; i <= G; ++i) {
      const double u = b.u1 + (b.u2 - b.u1) * i / G;
      const double rr = std::sqrt(u);
      for (int j = 0; j <= G; ++j) {
        const double th = b.th1 + (b.th2 - b.th1) * j / G;
        best = std::min(best,
                        bergman_distance1(pz, rr * std::exp(complexd(0.0, th))));
      }
    }
    return best;
  }
  for (const Point& s : tree.samples[id]) best = std::min(best, bergman_distance(p, s));
  return best;
}

}  // namespace

std::vector<int> bergman_neighbors(const BergmanTree& tree, int id, double R) {
  if (!(R > 0.0)) throw std::domain_error("bergman_neighbors: R > 0");
  const Point& c = tree.node(id).center;
  // cells sit inside D(center, ~2.6 lambda); 4 lambda is a safe circumradius cap
  const double slack = 4.0 * tree.cfg.lambda;
  const double reach = R + slack;
  std::vector<int> out;
  auto consider = [&](const TreeNode& nd) {
    const double dc = bergman_distance(c, nd.center);
    if (dc <= R)
      out.push_back(nd.id);
    else if (dc <= reach && cell_min_dist(tree, nd.id, c) <= R)
      out.push_back(nd.id);
  };
  // centers of level L sit at Bergman radius lambda (L + 1/2), so
  // d(c, c') >= lambda |level - L| and levels outside the window cannot reach
  const int lev = tree.node(id).level;
  const int win = int(std::ceil(reach / tree.cfg.lambda)) + 1;
  for (int L = std::max(0, lev - win);
       L <= std::min(tree.cfg.depth, lev + win); ++L) {
    const std::vector<int>& row = tree.levels[L];
    const long J = long(row.size());
    if (tree.cfg.n != 1 || J <= 16) {
      for (int oid : row) consider(tree.node(oid));
      continue;
    }
    // n = 1 arcs are uniform and angularly ordered, and at fixed radii the
    // center distance grows with the angular gap, so expand outward from the
    // arc under the query center until even the bare center distance fails
    const complexd cz = c[0];
    const long j0 = std::min(J - 1, long(angle_of(cz) / kTwoPi * J));
    consider(tree.node(row[j0]));
    for (long step = 1; 2 * step <= J; ++step) {
      const long right = (j0 + step) % J;
      const long left = (j0 - step % J + J) % J;
      bool any = false;
      for (long j : {right, left}) {
        const complexd oz = tree.node(row[j]).center[0];
        if (bergman_distance1(cz, oz) <= reach) {
          consider(tree.node(row[j]));
          any = true;
        }
        if (right == left) break;
      }
      if (!any) break;
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<int> boundary_neighbors(const BergmanTree& tree, int id, double R) {
  const TreeNode& a = tree.node(id);
  if (a.level < 1) throw std::domain_error("boundary_neighbors: root has no boundary direction");
  const double thr = R * std::exp(-tree.cfg.lambda * a.level);
  const double an = norm(a.center);
  Point ea(a.center);
  for (auto& c : ea) c /= an;
  std::vector<int> out;
  for (int oid : tree.levels[a.level]) {
    const TreeNode& o = tree.node(oid);
    const double on = norm(o.center);
    Point eo(o.center);
    for (auto& c : eo) c /= on;
    if (nonisotropic_distance(ea, eo) < thr) out.push_back(oid);
  }
  return out;
}

// ----------------------------------------------------------------- regions

std::vector<int> region_Q_nodes(const BergmanTree& tree, int id) {
  std::vector<int> ids = bergman_neighbors(tree, id, 6.0 * tree.cfg.lambda);
  for (int ch : tree.node(id).children) ids.push_back(ch);
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  return ids;
}

std::vector<int> region_S_nodes(const BergmanTree& tree, int id, double R,
                                bool* truncated) {
  std::vector<int> seed = bergman_neighbors(tree, id, R);
  std::vector<char> seen(tree.nodes.size(), 0);
  std::vector<int> stack = seed, out;
  bool trunc = false;
  while (!stack.empty()) {
    const int cur = stack.back();
    stack.pop_back();
    if (seen[cur]) continue;
    seen[cur] = 1;
    out.push_back(cur);
    const TreeNode& nd = tree.node(cur);
    if (nd.level == tree.cfg.depth) trunc = true;  // would continue below the cutoff
    for (int ch : nd.children) stack.push_back(ch);
  }
  std::sort(out.begin(), out.end());
  if (truncated) *truncated = trunc;
  return out;
}

Region region_from_nodes(const BergmanTree& tree, const std::vector<int>& ids) {
  if (tree.cfg.n == 1) {
    std::vector<PolarBox> boxes;
    boxes.reserve(ids.size());
    for (int id : ids) boxes.push_back(tree.cell_box(id));
    return Region::polar_boxes(std::move(boxes));
  }
  int max_level = 0;
  for (int id : ids) max_level = std::max(max_level, tree.node(id).level);
  const double eps = 1.0 - std::tanh(tree.cfg.lambda * (max_level + 1));
  std::vector<char> member(tree.nodes.size(), 0);
  for (int id : ids) member[id] = 1;
  const BergmanTree* self = &tree;
  return Region::membership(
      [self, member = std::move(member)](const Point& z) {
        try {
          const int id = locate_cell(*self, z);
          return bool(member[id]);
        } catch (const OutOfDepthError&) {
          return false;
        }
      },
      eps);
}

Region region_Q(const BergmanTree& tree, int id) {
  return region_from_nodes(tree, region_Q_nodes(tree, id));
}

Region region_S(const BergmanTree& tree, int id, double R, bool* truncated) {
  return region_from_nodes(tree, region_S_nodes(tree, id, R, truncated));
}

// ----------------------------------------------------------------- volumes

double cell_volume(const BergmanTree& tree, int id, const WeightedMeasure& meas) {
  require_valid(meas);
  if (meas.n != tree.cfg.n) throw std::invalid_argument("cell_volume: dimension mismatch");
  const TreeNode& nd = tree.node(id);
  const double g = meas.gamma;
  if (tree.cfg.n == 1) {
    const PolarBox b = tree.cell_box(id);
    return (b.th2 - b.th1) / kTwoPi *
           (std::pow(1.0 - b.u1, g + 1.0) - std::pow(1.0 - b.u2, g + 1.0));
  }
  if (nd.level == 0)  // exact: v_gamma(|z|^2 <= u) is a regularized beta
    return boost::math::ibeta(double(meas.n), g + 1.0, tree.level_u2(0));
  const double u1 = tree.level_u1(nd.level), u2 = tree.level_u2(nd.level);
  const double shell_v0 = std::pow(u2, meas.n) - std::pow(u1, meas.n);
  const double ratio = std::exp(std::lgamma(meas.n + 1.0 + g) - std::lgamma(g + 1.0) -
                                std::lgamma(meas.n + 1.0));  // c_gamma / c_0
  double acc = 0.0;
  for (const Point& s : tree.samples[id]) acc += std::pow(1.0 - norm_sq(s), g);
  return ratio * shell_v0 / double(tree.level_sample_count[nd.level]) * acc;
}

double nodes_volume(const BergmanTree& tree, const std::vector<int>& ids,
                    const WeightedMeasure& meas) {
  double v = 0.0;
  for (int id : ids) v += cell_volume(tree, id, meas);
  return v;
}

CellRadii estimate_cell_radii(const BergmanTree& tree, int id) {
  const TreeNode& nd = tree.node(id);
  const double half = 0.5 * tree.cfg.lambda;  // radial distance to both shell faces
  if (nd.level == 0) {
    const double l = tree.cfg.lambda;
    return {l, l};
  }
  if (tree.cfg.n == 1) {
    const PolarBox b = tree.cell_box(id);
    const complexd c = nd.center[0];
    const int G = 48;
    double inner = 1e300, outer = 0.0;
    auto visit = [&](double u, double th) {
      const double d = bergman_distance1(c, std::sqrt(u) * std::exp(complexd(0.0, th)));
      inner = std::min(inner, d);
      outer = std::max(outer, d);
    };
    for (int i = 0; i <= G; ++i) {
      const double fi = double(i) / G;
      visit(b.u1, b.th1 + (b.th2 - b.th1) * fi);  // inner face
      visit(b.u2, b.th1 + (b.th2 - b.th1) * fi);  // outer face
      visit(b.u1 + (b.u2 - b.u1) * fi, b.th1);    // side faces
      visit(b.u1 + (b.u2 - b.u1) * fi, b.th2);
    }
    return {inner, outer};
  }
  double outer = half;
  for (const Point& s : tree.samples[id])
    outer = std::max(outer, bergman_distance(nd.center, s));
  double inner = half;
  for (int lvl = std::max(1, nd.level - 1);
       lvl <= std::min(tree.cfg.depth, nd.level + 1); ++lvl)
    for (int oid : tree.levels[lvl]) {
      if (oid == id) continue;
      for (const Point& s : tree.samples[oid])
        inner = std::min(inner, bergman_distance(nd.center, s));
    }
  return {inner, outer};
}

// ---------------------------------------------------------------- coloring

std::vector<ColorClass> color_decompose(const BergmanTree& tree, int M) {
  if (M < 2) throw std::domain_error("color_decompose: M >= 2");
  // residue r = level mod (M+1) guarantees strict |d(a)-d(b)| > M across
  // levels; within one level, greedy beta-separated subclasses.
  std::map<std::pair<int, int>, std::vector<int>> classes;  // (residue, sub) -> ids
  for (int N = 0; N <= tree.cfg.depth; ++N) {
    const double thr = M * std::exp(-tree.cfg.lambda * N);
    std::vector<std::vector<int>> subs;
    std::vector<std::vector<Point>> sub_dirs;
    for (int id : tree.levels[N]) {
      const TreeNode& nd = tree.node(id);
      Point dir = nd.center;
      const double nn = norm(dir);
      if (nn > 0)
        for (auto& c : dir) c /= nn;
      bool placed = false;
      for (size_t k = 0; k < subs.size() && !placed; ++k) {
        bool ok = true;
        for (const Point& d : sub_dirs[k])
          if (!(nonisotropic_distance(dir, d) > thr)) {
            ok = false;
            break;
          }
        if (ok) {
          subs[k].push_back(id);
          sub_dirs[k].push_back(dir);
          placed = true;
        }
      }
      if (!placed) {
        subs.push_back({id});
        sub_dirs.push_back({dir});
      }
    }
    const int r = N % (M + 1);
    for (size_t k = 0; k < subs.size(); ++k) {
      auto& dst = classes[{r, int(k)}];
      dst.insert(dst.end(), subs[k].begin(), subs[k].end());
    }
  }
  std::vector<ColorClass> out;
  for (auto& [key, members] : classes)
    out.push_back(ColorClass{int(out.size()), std::move(members), M});
  return out;
}

// ------------------------------------------------------------------ chains

namespace {

Point unit_direction(const Point& p) {
  Point d(p);
  const double nn = norm(d);
  for (auto& c : d) c /= nn;
  return d;
}

}  // namespace

Chain build_chain(const BergmanTree& tree, int alpha, int nu) {
  const TreeNode& a = tree.node(alpha);
  const TreeNode& b = tree.node(nu);
  if (a.level != b.level) throw std::domain_error("build_chain: levels differ");
  if (a.level < 1) throw std::domain_error("build_chain: level >= 1 required");
  if (alpha == nu) return Chain{{alpha}};

  const int N = a.level;
  const Point ea = unit_direction(a.center);
  const Point en = unit_direction(b.center);
  const complexd kappa = herm_dot(en, ea);

  // orthogonal component of the target direction
  Point perp(en);
  for (int i = 0; i < tree.cfg.n; ++i) perp[i] -= kappa * ea[i];
  const double pn = norm(perp);
  const bool dependent = pn < 1e-12;
  if (!dependent)
    for (auto& c : perp) c /= pn;

  auto path_point = [&](double t) -> Point {
    if (dependent) {
      // same complex line: rotate by the phase of kappa
      const double dth = std::arg(kappa) * t;
      Point p(ea);
      const complexd rot = std::exp(complexd(0.0, dth));
      for (auto& c : p) c *= rot;
      return p;
    }
    const complexd h = (1.0 - t) + t * kappa;
    const double rad = clamp_radicand(1.0 - std::norm(h));
    Point p(tree.cfg.n);
    for (int i = 0; i < tree.cfg.n; ++i) p[i] = h * ea[i] + std::sqrt(rad) * perp[i];
    return p;
  };

  // beta-arclength is ~ sqrt(t) near t=0 and mirrored near t=1: sample a grid
  // dense at both ends
  const double beta_len = std::sqrt(std::abs(1.0 - kappa));
  const double cell_beta = std::exp(-tree.cfg.lambda * N);
  const int T = std::clamp(int(40.0 * beta_len / (0.1 * cell_beta)), 200, 400000);
  std::vector<double> ts;
  ts.reserve(2 * T + 2);
  for (int i = 0; i <= T; ++i) {
    const double s = double(i) / T;
    ts.push_back(s * s);
    ts.push_back(1.0 - (1.0 - s) * (1.0 - s));
  }
  std::sort(ts.begin(), ts.end());

  std::vector<int> seq;
  std::map<int, int> posn;
  for (double t : ts) {
    const int id = tree.levels[N][locate_direction(tree, N, path_point(t))];
    if (!seq.empty() && seq.back() == id) continue;
    auto it = posn.find(id);
    if (it != posn.end()) {
      // cut the loop back to the first visit
      for (size_t k = it->second + 1; k < seq.size(); ++k) posn.erase(seq[k]);
      seq.resize(it->second + 1);
      continue;
    }
    posn[id] = int(seq.size());
    seq.push_back(id);
  }
  if (seq.empty() || seq.front() != alpha) seq.insert(seq.begin(), alpha);
  if (seq.back() != nu) seq.push_back(nu);
  return Chain{std::move(seq)};
}

// ------------------------------------------------------------------ export

void export_jsonl(const BergmanTree& tree, std::ostream& os) {
  for (const TreeNode& nd : tree.nodes) {
    nlohmann::ordered_json j;
    j["level"] = nd.level;
    j["index"] = nd.index;
    auto pts = [](const Point& p) {
      nlohmann::ordered_json a = nlohmann::ordered_json::array();
      for (const complexd& c : p) a.push_back({c.real(), c.imag()});
      return a;
    };
    j["anchor"] = pts(nd.anchor);
    j["center"] = pts(nd.center);
    j["parent"] = nd.parent;
    j["children"] = nd.children;
    os << j.dump() << "\n";
  }
}

}  // namespace bergman
