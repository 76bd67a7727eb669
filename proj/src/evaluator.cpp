#include "levypw/evaluator.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <thread>

namespace levypw {

void QuadratureSpec::validate() const {
  if (t_max < 0) throw ConfigError("quadrature horizon must be >= 0");
  if (nodes_per_unit < 8) throw ConfigError("nodes_per_unit must be >= 8");
}

double QuadratureSpec::horizon(double m) const {
  return t_max > 0 ? t_max : 10.0 / (m * m);
}

int QuadratureSpec::nodes_for(int dims, double theta) const {
  double base = nodes_per_unit * theta;
  if (dims <= 1) return (int)std::clamp(20.0 * base, 400.0, 60000.0);
  if (dims == 2) return (int)std::clamp(base, 120.0, 4000.0);
  return (int)std::clamp(base / 8.0, 64.0, 500.0);
}

std::vector<double> graded_grid(double T, int N, double beta) {
  if (N < 2 || T <= 0) throw ConfigError("graded grid needs N >= 2 and T > 0");
  std::vector<double> u(N + 1);
  double den = std::expm1(beta);
  for (int i = 0; i <= N; ++i) u[i] = T * std::expm1(beta * i / N) / den;
  u[0] = 0;
  u[N] = T;
  return u;
}

namespace {

double grading_beta(double T, double mu2max) {
  return std::clamp(std::log1p(T * mu2max), 2.0, 12.0);
}

// Full-range composite trapezoid weights for the grid.
std::vector<double> trapezoid_weights(const std::vector<double>& u) {
  int N = (int)u.size() - 1;
  std::vector<double> w(N + 1);
  w[0] = (u[1] - u[0]) / 2;
  for (int i = 1; i < N; ++i) w[i] = (u[i + 1] - u[i - 1]) / 2;
  w[N] = (u[N] - u[N - 1]) / 2;
  return w;
}

// Weight of node i on the truncated range [u_s, u_N]. Interior and right
// boundary weights agree with the full-range ones; only the left boundary
// node changes.
inline double range_weight(const std::vector<double>& u, const std::vector<double>& wfull,
                           int i, int s) {
  int N = (int)u.size() - 1;
  if (s >= N) return 0;
  if (i == s) return (u[s + 1] - u[s]) / 2;
  return wfull[i];
}

// One connected graph evaluated by nested time loops over a shared graded
// grid. Vertices are placed at grid depths below their parents; per time
// assignment the spatial sums reduce to mode-space products, pointwise
// powers for parallel edges, and a brute-force sum as a last resort.
class TimeLoopEngine {
 public:
  TimeLoopEngine(const SimplifiedGraph& g, const Lattice& lat, const CumulantSet& cums,
                 const QuadratureSpec& quad, bool finite_t, double t, double f0)
      : g_(g), lat_(lat), S_((size_t)lat.sites()) {
    int n = g.n_roots;
    if (n < 1 || n > 2) throw ConfigError("evaluator handles 1 or 2 roots");
    if (!finite_t && g.has_init_leaf())
      throw ConfigError("equilibrium value undefined with initial-condition leaves");

    {
      int V = g.n_vertices();
      std::vector<std::vector<int>> adj(V);
      for (const auto& e : g.edges) {
        adj[e.from].push_back(e.to);
        adj[e.to].push_back(e.from);
      }
      std::vector<char> seen(V, 0);
      std::vector<int> stack{0};
      seen[0] = 1;
      while (!stack.empty()) {
        int v = stack.back();
        stack.pop_back();
        for (int w : adj[v])
          if (!seen[w]) {
            seen[w] = 1;
            stack.push_back(w);
          }
      }
      for (int v = 0; v < V; ++v)
        if (!seen[v]) throw ConfigError("graph must be connected");
    }

    double m2 = lat.mass() * lat.mass();
    T_ = finite_t ? t : quad.horizon(lat.mass());
    if (T_ <= 0) throw ConfigError("time horizon must be positive");

    // cumulant factor, one per empty vertex
    cumfac_ = 1;
    for (const auto& v : g.vertices)
      if (v.kind == SimplifiedGraph::VK::Empty) {
        if (v.legs > cums.max_order())
          throw ConfigError("cumulant set too short for a block of size " +
                            std::to_string(v.legs));
        cumfac_ *= cums(v.legs);
      }

    // classify vertices: pendant empties with <= 2 legs and one distinct
    // parent integrate out exactly; init leaves reduce to a parent-depth
    // factor; everything else internal becomes a time loop
    int V = g.n_vertices();
    std::vector<int> role(V, 0); // 0 loop, 1 root, 2 pendant, 3 init leaf
    for (int v = 0; v < n; ++v) role[v] = 1;
    std::vector<std::vector<int>> parents_of(V);
    for (const auto& e : g.edges) parents_of[e.to].push_back(e.from);
    struct RawPend {
      int vertex, parent, r;
    };
    std::vector<RawPend> raw_pend;
    std::vector<int> raw_init; // init leaf vertex ids
    for (int v = n; v < V; ++v) {
      const auto& vx = g.vertices[v];
      if (vx.kind == SimplifiedGraph::VK::InitLeaf) {
        role[v] = 3;
        raw_init.push_back(v);
      } else if (vx.kind == SimplifiedGraph::VK::Empty && vx.legs <= 2) {
        auto ps = parents_of[v];
        std::sort(ps.begin(), ps.end());
        ps.erase(std::unique(ps.begin(), ps.end()), ps.end());
        if (ps.size() == 1) {
          role[v] = 2;
          raw_pend.push_back({v, ps[0], vx.legs});
        }
      }
    }
    std::vector<int> loop_vertices;
    for (int v = n; v < V; ++v)
      if (role[v] == 0) loop_vertices.push_back(v);
    K_ = (int)loop_vertices.size();
    if (K_ > 3) throw NumericError("quadrature depth cap exceeded (more than 3 nested loops)");

    // topological order by the parent relation restricted to loop vertices
    std::vector<int> order;
    {
      std::vector<int> remaining = loop_vertices, placed(V, 0);
      while (!remaining.empty()) {
        bool advanced = false;
        for (auto it = remaining.begin(); it != remaining.end();) {
          bool ready = true;
          for (int pa : parents_of[*it])
            if (role[pa] == 0 && !placed[pa]) ready = false;
          if (ready) {
            placed[*it] = 1;
            order.push_back(*it);
            it = remaining.erase(it);
            advanced = true;
          } else {
            ++it;
          }
        }
        if (!advanced) throw NumericError("cyclic depth relation in graph");
      }
    }
    slot_of_.assign(V, -1);
    for (int i = 0; i < (int)order.size(); ++i) slot_of_[order[i]] = i;

    // per loop slot: slots of loop parents (roots pin the start at 0)
    loop_parents_.resize(K_);
    for (int i = 0; i < K_; ++i)
      for (int pa : parents_of[order[i]])
        if (role[pa] == 0) loop_parents_[i].push_back(slot_of_[pa]);

    // grid, weights, mode-exp table
    int N = quad.nodes_for(std::max(K_, 1), T_ * m2);
    u_ = graded_grid(T_, N, grading_beta(T_, lat.mu2_max()));
    wfull_ = trapezoid_weights(u_);
    E_.assign(N + 1, std::vector<double>(S_));
    for (int i = 0; i <= N; ++i)
      for (size_t k = 0; k < S_; ++k) E_[i][k] = std::exp(-u_[i] * lat.mu2(k));

    // spatial legs: edges not consumed by pendant or init reduction
    for (const auto& e : g.edges) {
      if (role[e.to] == 2 || role[e.to] == 3) continue;
      legs_.push_back({slot_code(role[e.from], e.from, n), slot_code(role[e.to], e.to, n)});
    }

    // per-slot depth factors: pendant tails and init pins multiply in at the
    // level where the parent index is chosen
    base_factor_ = cumfac_;
    slot_factor_.assign(K_, {});
    for (const auto& rp : raw_pend) {
      std::vector<double> pend = pendant_tail(rp.r);
      if (role[rp.parent] == 1) {
        base_factor_ *= pend[0];
      } else {
        int s = slot_of_[rp.parent];
        merge_factor(slot_factor_[s], pend);
      }
    }
    if (finite_t) {
      for (int v : raw_init) {
        int pa = parents_of[v][0];
        if (role[pa] == 1) {
          base_factor_ *= f0 * std::exp(-T_ * m2);
        } else {
          int s = slot_of_[pa];
          std::vector<double> fac(N + 1);
          for (int i = 0; i <= N; ++i) fac[i] = f0 * std::exp(-(T_ - u_[i]) * m2);
          merge_factor(slot_factor_[s], fac);
        }
      }
    } else if (!raw_init.empty()) {
      throw ConfigError("initial-condition leaves need the finite-time evaluator");
    }
  }

  // Accumulated lag field for 2 roots, constant field for 1 root.
  Field run() {
    acc_.assign(S_, 0.0);
    scalar_acc_ = 0;
    idx_.assign(K_, 0);
    descend(0, base_factor_);
    // acc_ holds the transform of the lag kernel, so one inverse pass ends it
    Field out;
    if (g_.n_roots == 2) {
      out = lat_.idft_real(acc_);
    } else {
      out.assign(S_, scalar_acc_);
    }
    return out;
  }

 private:
  struct LegSlot {
    int a, b;
  }; // codes: 0..n-1 roots, n+s loop slot s

  int slot_code(int role, int v, int n) const { return role == 1 ? v : n + slot_of_[v]; }

  static void merge_factor(std::vector<double>& into, const std::vector<double>& f) {
    if (into.empty()) {
      into = f;
    } else {
      for (size_t i = 0; i < into.size(); ++i) into[i] *= f[i];
    }
  }

  // pend[i] = integral over [u_i, T] of delta^d sum_x kernel(w - u_i, x)^r on
  // the shared grid; r = 1 picks the zero mode, r = 2 uses the Parseval form.
  // Backward recursion keeps every exponent negative.
  std::vector<double> pendant_tail(int r) const {
    int N = (int)u_.size() - 1;
    std::vector<double> pend(N + 1, 0.0);
    // the integrand is a sum of exponentials exp(-b_k gap)
    std::vector<std::pair<double, double>> terms; // (amplitude, rate)
    if (r == 1) {
      terms.push_back({1.0, lat_.mu2(0)});
    } else {
      double amp = 1.0 / (lat_.cell_volume() * (double)lat_.sites());
      for (size_t k = 0; k < S_; ++k) terms.push_back({amp, 2 * lat_.mu2(k)});
    }
    std::vector<double> R(N + 1);
    for (const auto& [a, b] : terms) {
      R[N] = wfull_[N];
      for (int i = N - 1; i >= 0; --i)
        R[i] = wfull_[i] + std::exp(-(u_[i + 1] - u_[i]) * b) * R[i + 1];
      for (int i = 0; i < N; ++i)
        pend[i] += a * (R[i] - wfull_[i] + (u_[i + 1] - u_[i]) / 2);
    }
    return pend;
  }

  inline double ratio(int ito, int ifrom, size_t k) const {
    double den = E_[ifrom][k];
    if (den < 1e-280) return std::exp(-(u_[ito] - u_[ifrom]) * lat_.mu2(k));
    return E_[ito][k] / den;
  }

  void descend(int level, double weight) {
    int N = (int)u_.size() - 1;
    if (level == K_) {
      contract(weight);
      return;
    }
    int s = 0;
    for (int ps : loop_parents_[level]) s = std::max(s, idx_[ps]);
    if (s >= N) return;
    const auto& fac = slot_factor_[level];
    for (int i = s; i <= N; ++i) {
      double w = range_weight(u_, wfull_, i, s);
      if (w == 0) continue;
      if (!fac.empty()) w *= fac[i];
      idx_[level] = i;
      descend(level + 1, weight * w);
    }
  }

  int depth_index(int code) const { return code < g_.n_roots ? 0 : idx_[code - g_.n_roots]; }

  // spatial contraction for the current time assignment
  void contract(double weight) {
    if (weight == 0) return;
    int n = g_.n_roots;
    int A = n + K_;
    // mode-space kernel per leg
    std::vector<std::vector<double>> spec;
    std::vector<std::array<int, 2>> es;
    spec.reserve(legs_.size());
    double invvol = 1.0 / lat_.cell_volume();
    for (const auto& lg : legs_) {
      int ia = depth_index(lg.a), ib = depth_index(lg.b);
      std::vector<double> v(S_);
      for (size_t k = 0; k < S_; ++k) v[k] = invvol * ratio(ib, ia, k);
      spec.push_back(std::move(v));
      es.push_back({lg.a, lg.b});
    }
    double scalar = 1;
    std::vector<char> alive(A, 1);
    double vol = lat_.cell_volume();

    auto degree_info = [&](int v) {
      std::vector<int> nbr;
      for (size_t e = 0; e < es.size(); ++e) {
        if (spec[e].empty()) continue;
        int o = -1;
        if (es[e][0] == v) o = es[e][1];
        if (es[e][1] == v) o = es[e][0];
        if (o >= 0 && std::find(nbr.begin(), nbr.end(), o) == nbr.end()) nbr.push_back(o);
      }
      return nbr;
    };
    auto merge_parallel = [&](int a, int b) {
      std::vector<size_t> grp;
      for (size_t e = 0; e < es.size(); ++e)
        if (!spec[e].empty() && ((es[e][0] == a && es[e][1] == b) || (es[e][0] == b && es[e][1] == a)))
          grp.push_back(e);
      if (grp.size() <= 1) return;
      bool same = true;
      for (size_t i = 1; i < grp.size(); ++i)
        if (spec[grp[i]] != spec[grp[0]]) same = false;
      Field pos = lat_.idft_real(spec[grp[0]]);
      if (same) {
        for (double& x : pos) x = std::pow(x, (double)grp.size());
      } else {
        for (size_t i = 1; i < grp.size(); ++i) {
          Field q = lat_.idft_real(spec[grp[i]]);
          for (size_t x = 0; x < S_; ++x) pos[x] *= q[x];
        }
      }
      auto back = lat_.dft(pos);
      for (size_t k = 0; k < S_; ++k) spec[grp[0]][k] = back[k].real();
      for (size_t i = 1; i < grp.size(); ++i) spec[grp[i]].clear();
    };

    while (true) {
      int best = -1, best_deg = 1 << 30;
      for (int v = n; v < A; ++v) {
        if (!alive[v]) continue;
        int deg = (int)degree_info(v).size();
        if (deg < best_deg) {
          best_deg = deg;
          best = v;
        }
      }
      if (best < 0) break;
      auto nbr = degree_info(best);
      for (int o : nbr) merge_parallel(best, o);
      if (best_deg == 0) {
        // isolated internal vertex: free position sum
        scalar *= vol * (double)lat_.sites();
        alive[best] = 0;
      } else if (best_deg == 1) {
        for (size_t e = 0; e < es.size(); ++e)
          if (!spec[e].empty() && (es[e][0] == best || es[e][1] == best)) {
            scalar *= vol * spec[e][0];
            spec[e].clear();
          }
        alive[best] = 0;
      } else if (best_deg == 2) {
        size_t e1 = SIZE_MAX, e2 = SIZE_MAX;
        for (size_t e = 0; e < es.size(); ++e)
          if (!spec[e].empty() && (es[e][0] == best || es[e][1] == best)) {
            if (e1 == SIZE_MAX)
              e1 = e;
            else
              e2 = e;
          }
        int a = es[e1][0] == best ? es[e1][1] : es[e1][0];
        int b = es[e2][0] == best ? es[e2][1] : es[e2][0];
        for (size_t k = 0; k < S_; ++k) spec[e1][k] = vol * spec[e1][k] * spec[e2][k];
        es[e1] = {a, b};
        spec[e2].clear();
        alive[best] = 0;
      } else {
        brute_force(spec, es, alive, scalar, weight);
        return;
      }
    }
    // only root-root edges remain
    if (n == 1) {
      scalar_acc_ += weight * scalar;
      return;
    }
    std::vector<size_t> rr;
    for (size_t e = 0; e < es.size(); ++e)
      if (!spec[e].empty()) rr.push_back(e);
    if (rr.empty()) {
      // spatially disconnected roots cannot arise from a connected graph
      throw NumericError("lost root connection during contraction");
    }
    merge_parallel(0, 1);
    rr.clear();
    for (size_t e = 0; e < es.size(); ++e)
      if (!spec[e].empty()) rr.push_back(e);
    const auto& fin = spec[rr[0]];
    double c = weight * scalar;
    for (size_t k = 0; k < S_; ++k) acc_[k] += c * fin[k];
  }

  // position-space fallback when every internal vertex keeps degree >= 3
  void brute_force(std::vector<std::vector<double>>& spec, std::vector<std::array<int, 2>>& es,
                   std::vector<char>& alive, double scalar, double weight) {
    int n = g_.n_roots;
    int A = n + K_;
    std::vector<int> ivs;
    for (int v = n; v < A; ++v)
      if (alive[v]) ivs.push_back(v);
    if ((int)ivs.size() > 3) throw NumericError("contraction fallback cap exceeded");
    std::vector<Field> pos;
    std::vector<std::array<int, 2>> pes;
    for (size_t e = 0; e < es.size(); ++e)
      if (!spec[e].empty()) {
        pos.push_back(lat_.idft_real(spec[e]));
        pes.push_back(es[e]);
      }
    double vol = lat_.cell_volume();
    long long S = (long long)S_;
    std::vector<long long> x(A, 0);
    double volfac = std::pow(vol, (double)ivs.size());
    auto lagdiff = [&](long long xa, long long xb) {
      // site index of (coords(xb) - coords(xa)) mod L
      return lat_.mode_add(xb, lat_.mode_neg(xa)); // mode and site arithmetic coincide
    };
    long long nlag = n == 2 ? S : 1;
    for (long long lag = 0; lag < nlag; ++lag) {
      if (n == 2) x[1] = lag;
      double total = 0;
      std::function<void(size_t)> rec = [&](size_t iv) {
        if (iv == ivs.size()) {
          double prod = 1;
          for (size_t e = 0; e < pes.size(); ++e)
            prod *= pos[e][lagdiff(x[pes[e][0]], x[pes[e][1]])];
          total += prod;
          return;
        }
        for (long long xs = 0; xs < S; ++xs) {
          x[ivs[iv]] = xs;
          rec(iv + 1);
        }
      };
      rec(0);
      double val = weight * scalar * volfac * total;
      if (n == 2)
        bf_pos_[lag] += val;
      else
        scalar_acc_ += val;
    }
  }

 public:
  void enable_brute_buffer() { bf_pos_.assign(S_, 0.0); }
  const Field& brute_buffer() const { return bf_pos_; }

 private:
  const SimplifiedGraph& g_;
  const Lattice& lat_;
  size_t S_;
  double T_ = 0, cumfac_ = 1, base_factor_ = 1, scalar_acc_ = 0;
  int K_ = 0;
  std::vector<double> u_, wfull_;
  std::vector<std::vector<double>> E_;
  std::vector<int> slot_of_, idx_;
  std::vector<std::vector<int>> loop_parents_;
  std::vector<LegSlot> legs_;
  std::vector<std::vector<double>> slot_factor_;
  std::vector<double> acc_;
  Field bf_pos_;
};

Field run_engine(TimeLoopEngine& eng) {
  eng.enable_brute_buffer();
  Field out = eng.run();
  const Field& bf = eng.brute_buffer();
  for (size_t i = 0; i < out.size(); ++i) out[i] += bf[i];
  return out;
}

bool momentum_eligible(const SimplifiedGraph& g) {
  if (g.has_init_leaf() || g.n_roots > 2) return false;
  int V = g.n_vertices(), I = V - g.n_roots;
  int f = (int)g.edges.size() + (g.n_roots == 2 ? 1 : 0) - (V - 1);
  return I <= 6 && f <= 3;
}

} // namespace

double evaluate_graph_equilibrium(const SimplifiedGraph& g,
                                  const std::vector<long long>& root_sites,
                                  const CumulantSet& cums, const LatticeConfig& cfg,
                                  const QuadratureSpec& quad, EvalMethod method) {
  Lattice lat(cfg);
  Field f = equilibrium_lag_field(g, cums, lat, quad, method);
  if ((int)root_sites.size() != g.n_roots)
    throw ConfigError("root site count must match the root count");
  if (g.n_roots == 1) return f[0];
  long long lag = lat.mode_add(root_sites[1], lat.mode_neg(root_sites[0]));
  return f[lag];
}

Field equilibrium_lag_field(const SimplifiedGraph& g, const CumulantSet& cums,
                            const Lattice& lat, const QuadratureSpec& quad,
                            EvalMethod method) {
  quad.validate();
  if (method == EvalMethod::Momentum ||
      (method == EvalMethod::Auto && momentum_eligible(g)))
    return equilibrium_lag_field_momentum(g, cums, lat);
  TimeLoopEngine eng(g, lat, cums, quad, false, 0, 0);
  return run_engine(eng);
}

double evaluate_graph_finite_t(const SimplifiedGraph& g, double t,
                               const std::vector<long long>& root_sites,
                               const CumulantSet& cums, double f0,
                               const LatticeConfig& cfg, const QuadratureSpec& quad) {
  Lattice lat(cfg);
  Field f = finite_t_lag_field(g, t, cums, f0, lat, quad);
  if ((int)root_sites.size() != g.n_roots)
    throw ConfigError("root site count must match the root count");
  if (g.n_roots == 1) return f[0];
  long long lag = lat.mode_add(root_sites[1], lat.mode_neg(root_sites[0]));
  return f[lag];
}

Field finite_t_lag_field(const SimplifiedGraph& g, double t, const CumulantSet& cums,
                         double f0, const Lattice& lat, const QuadratureSpec& quad) {
  quad.validate();
  if (t <= 0) throw ConfigError("finite-time evaluation needs t > 0");
  TimeLoopEngine eng(g, lat, cums, quad, true, t, f0);
  return run_engine(eng);
}

SeriesCoefficients truncated_correlation_series(int n, int M, const CumulantSet& cums,
                                                const LatticeConfig& cfg,
                                                const QuadratureSpec& quad,
                                                bool equilibrium, bool drop_tadpoles,
                                                int p, EvalMethod method, bool even_only,
                                                double t, double f0, int threads) {
  if (n < 1 || n > 2) throw ConfigError("correlation order n must be 1 or 2");
  if (M < 0 || M > 2) throw ConfigError("series order cap is 2");
  Lattice lat(cfg);
  bool odd_vanish = true;
  for (int k = 1; k <= cums.max_order(); k += 2)
    if (cums(k) != 0) odd_vanish = false;
  bool prune = even_only || odd_vanish;

  SeriesCoefficients out;
  out.n = n;
  out.graph_values.resize(M + 1);
  out.coefficient.resize(M + 1);
  for (int m = 0; m <= M; ++m) {
    auto graphs = filter_connected(enumerate_graphs(m, n, p, equilibrium));
    if (prune) graphs = prune_odd(graphs);
    if (drop_tadpoles) {
      std::vector<PWGraph> kept;
      for (const auto& g : graphs)
        if (!is_tadpole(g)) kept.push_back(g);
      graphs = kept;
    }
    std::vector<SimplifiedGraph> sgs;
    for (const auto& g : graphs) sgs.push_back(simplify(g));

    std::vector<Field> vals(sgs.size());
    auto work = [&](size_t lo, size_t hi) {
      for (size_t i = lo; i < hi; ++i) {
        if (equilibrium)
          vals[i] = equilibrium_lag_field(sgs[i], cums, lat, quad, method);
        else
          vals[i] = finite_t_lag_field(sgs[i], t, cums, f0, lat, quad);
      }
    };
    int nt = threads > 0 ? std::min<int>(threads, (int)sgs.size()) : 1;
    if (nt > 1) {
      std::vector<std::thread> pool;
      size_t chunk = (sgs.size() + nt - 1) / nt;
      for (int th = 0; th < nt; ++th) {
        size_t lo = th * chunk, hi = std::min(sgs.size(), lo + chunk);
        if (lo < hi) pool.emplace_back(work, lo, hi);
      }
      for (auto& th : pool) th.join();
    } else {
      work(0, sgs.size());
    }

    Field coef(lat.sites(), 0.0);
    double sign = (m % 2 == 0) ? 1.0 : -1.0;
    for (size_t i = 0; i < sgs.size(); ++i) {
      out.graph_values[m].push_back({sgs[i].id, vals[i]});
      double mm = sign * (double)sgs[i].mult;
      for (size_t x = 0; x < coef.size(); ++x) coef[x] += mm * vals[i][x];
    }
    out.coefficient[m] = std::move(coef);
  }
  return out;
}

FirstOrderKernels first_order_kernels(const Lattice& lat, const QuadratureSpec& quad,
                                      EvalMethod method, int p) {
  CumulantSet unit2, unitp1;
  unit2.c.assign(p + 2, 0.0);
  unit2.c[2] = 1;
  unitp1.c.assign(p + 2, 0.0);
  unitp1.c[p + 1] = 1;

  FirstOrderKernels out;
  size_t S = (size_t)lat.sites();
  out.P1.assign(S, 0.0);
  out.P2.assign(S, 0.0);
  out.PT.assign(S, 0.0);

  auto order_sum = [&](int m, const CumulantSet& cs, Field& into, double sign) {
    auto graphs = prune_odd(filter_connected(enumerate_graphs(m, 2, p, true)));
    for (const auto& g : graphs) {
      auto sg = simplify(g);
      bool nonzero = true;
      for (int legs : sg.empty_leg_counts())
        if (cs(legs) == 0) nonzero = false;
      if (!nonzero) continue;
      Field v = equilibrium_lag_field(sg, cs, lat, quad, method);
      for (size_t x = 0; x < S; ++x) into[x] += sign * (double)sg.mult * v[x];
    }
  };
  order_sum(0, unit2, out.P1, 1.0);
  order_sum(1, unitp1, out.P2, -1.0);
  order_sum(1, unit2, out.PT, -1.0);
  return out;
}

Field assemble_two_point(const FirstOrderKernels& k, double c2, double c4, double lambda,
                         bool include_tadpole) {
  Field out(k.P1.size());
  for (size_t x = 0; x < out.size(); ++x) {
    out[x] = c2 * k.P1[x] + lambda * c4 * k.P2[x];
    if (include_tadpole) out[x] += lambda * c2 * c2 * k.PT[x];
  }
  return out;
}

// ---- discrete-noise perturbative recursion ----

namespace {

void check_initial(const Field& f, const Lattice& lat) {
  if (!f.empty() && (long long)f.size() != lat.sites())
    throw ConfigError("initial field size must match the lattice");
}

Field conv_or_zero(const Lattice& lat, const Field& g, const Field& f) {
  if (f.empty()) return Field((size_t)lat.sites(), 0.0);
  return convolve(lat, g, f);
}

// order compositions as multisets: lists of p child orders, non-decreasing
void order_multisets(int p, int total, int minv, std::vector<int>& cur,
                     std::vector<std::vector<int>>& out) {
  if ((int)cur.size() == p) {
    if (total == 0) out.push_back(cur);
    return;
  }
  for (int v = minv; v <= total; ++v) {
    cur.push_back(v);
    order_multisets(p, total - v, v, cur, out);
    cur.pop_back();
  }
}

double multiset_multinomial(int p, const std::vector<int>& orders) {
  auto fact = [](int k) {
    double r = 1;
    for (int i = 2; i <= k; ++i) r *= i;
    return r;
  };
  double denom = 1;
  int run = 1;
  for (size_t i = 1; i <= orders.size(); ++i) {
    if (i < orders.size() && orders[i] == orders[i - 1]) {
      ++run;
    } else {
      denom *= fact(run);
      run = 1;
    }
  }
  return fact(p) / denom;
}

std::vector<Field> heat_series(const Lattice& lat, double dt, long long K) {
  std::vector<Field> G(K + 1);
  for (long long k = 0; k <= K; ++k) G[k] = heat_kernel(lat, k * dt);
  return G;
}

std::vector<Field> noise_base_series(const NoiseRealization& noise, const Lattice& lat,
                                     const std::vector<Field>& G) {
  long long K = noise.steps();
  std::vector<Field> A(K + 1, Field((size_t)lat.sites(), 0.0));
  for (long long k = 1; k <= K; ++k)
    for (long long j = 0; j < k; ++j) {
      Field c = convolve(lat, G[k - 1 - j], noise.increments[j]);
      for (size_t x = 0; x < c.size(); ++x) A[k][x] += c[x];
    }
  return A;
}

} // namespace

std::vector<std::vector<Field>> perturbative_solution(int J, const NoiseRealization& noise,
                                                      const Field& f, const Lattice& lat,
                                                      int p) {
  if (J < 0 || p < 1) throw ConfigError("need J >= 0 and p >= 1");
  check_initial(f, lat);
  long long K = noise.steps();
  auto G = heat_series(lat, noise.dt, K);
  size_t S = (size_t)lat.sites();

  std::vector<std::vector<Field>> X(J + 1, std::vector<Field>(K + 1, Field(S, 0.0)));
  {
    auto A = noise_base_series(noise, lat, G);
    for (long long k = 0; k <= K; ++k) {
      Field init = conv_or_zero(lat, G[k], f);
      for (size_t x = 0; x < S; ++x) X[0][k][x] = A[k][x] + init[x];
    }
  }
  for (int j = 1; j <= J; ++j) {
    std::vector<std::vector<int>> msets;
    std::vector<int> cur;
    order_multisets(p, j - 1, 0, cur, msets);
    for (auto& ms : msets)
      for (int o : ms)
        if (o > j - 1) throw NumericError("order bookkeeping error");
    // source at each earlier step, then propagate
    std::vector<Field> Sfield(K + 1, Field(S, 0.0));
    for (long long l = 0; l <= K; ++l)
      for (const auto& ms : msets) {
        double coef = multiset_multinomial(p, ms);
        Field prod(S, coef);
        for (int o : ms)
          for (size_t x = 0; x < S; ++x) prod[x] *= X[o][l][x];
        for (size_t x = 0; x < S; ++x) Sfield[l][x] += prod[x];
      }
    for (long long k = 1; k <= K; ++k)
      for (long long l = 0; l < k; ++l) {
        Field c = convolve(lat, G[k - l], Sfield[l]);
        for (size_t x = 0; x < S; ++x) X[j][k][x] += noise.dt * c[x];
      }
  }
  return X;
}

namespace {

std::vector<Field> tree_series(const TreeNode& node, int p, const NoiseRealization& noise,
                               const Field& f, const Lattice& lat,
                               const std::vector<Field>& G) {
  long long K = noise.steps();
  size_t S = (size_t)lat.sites();
  if (node.kind == TreeNode::Kind::NoiseLeaf) return noise_base_series(noise, lat, G);
  if (node.kind == TreeNode::Kind::InitLeaf) {
    std::vector<Field> B(K + 1);
    for (long long k = 0; k <= K; ++k) B[k] = conv_or_zero(lat, G[k], f);
    return B;
  }
  std::vector<std::vector<Field>> ch;
  for (const auto& c : node.children) ch.push_back(tree_series(c, p, noise, f, lat, G));
  std::vector<Field> prod(K + 1, Field(S, 1.0));
  for (long long l = 0; l <= K; ++l)
    for (const auto& cs : ch)
      for (size_t x = 0; x < S; ++x) prod[l][x] *= cs[l][x];
  std::vector<Field> V(K + 1, Field(S, 0.0));
  for (long long k = 1; k <= K; ++k)
    for (long long l = 0; l < k; ++l) {
      Field c = convolve(lat, G[k - l], prod[l]);
      for (size_t x = 0; x < S; ++x) V[k][x] += noise.dt * c[x];
    }
  return V;
}

} // namespace

Field tree_value_field(const RootedTree& t, const NoiseRealization& noise, const Field& f,
                       const Lattice& lat, int step) {
  check_initial(f, lat);
  if (step < 0 || step > noise.steps()) throw ConfigError("step outside the realization");
  auto G = heat_series(lat, noise.dt, noise.steps());
  auto series = tree_series(t.body, t.p, noise, f, lat, G);
  Field out = series[step];
  double mult = (double)multiplicity(t);
  for (double& v : out) v *= mult;
  return out;
}

double tree_value(const RootedTree& t, int step, long long site,
                  const NoiseRealization& noise, const Field& f, const Lattice& lat) {
  Field v = tree_value_field(t, noise, f, lat, step);
  return v[(size_t)site];
}

} // namespace levypw
