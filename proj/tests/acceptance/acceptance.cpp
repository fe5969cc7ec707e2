// Acceptance suite: one PASS / FAIL / SKIP line per criterion, followed by
// the measured values. Exit status is nonzero when any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "hetrank/hetrank.hpp"

using namespace hetrank;

namespace {

enum class Status { Pass, Fail, Skip };

struct Outcome {
  Status status = Status::Fail;
  std::string detail;
};

std::string fmt(const char* spec, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

std::vector<double> uniform_vector(std::mt19937_64& gen, std::size_t len, double lo, double hi) {
  std::uniform_real_distribution<double> d(lo, hi);
  std::vector<double> out(len);
  for (double& v : out) v = d(gen);
  return out;
}

// n in [2, 8] items, m in [1, 4] users, 1..30 records each over random pairs.
ComparisonDataset random_instance(std::mt19937_64& gen) {
  const std::size_t n = 2 + gen() % 7;
  const std::size_t m = 1 + gen() % 4;
  std::vector<Comparison> records;
  for (std::size_t u = 0; u < m; ++u) {
    const std::size_t k = 1 + gen() % 30;
    for (std::size_t r = 0; r < k; ++r) {
      const auto i = static_cast<ItemId>(gen() % n);
      auto j = static_cast<ItemId>(gen() % n);
      while (j == i) j = static_cast<ItemId>(gen() % n);
      records.push_back({static_cast<UserId>(u), i, j});
    }
  }
  return ComparisonDataset(n, m, std::move(records));
}

// ---------------------------------------------------------------- 1

// Largest |analytic - central difference| over the gradient, relative to the
// largest central-difference component (floored at 1e-6).
template <class Objective>
double gradient_error(const Objective& obj, std::vector<double> s, std::vector<double> p) {
  const double h = 1e-6;
  const Evaluation ev = obj.evaluate(s, p);
  double worst = 0.0;
  auto sweep = [&](std::vector<double>& x, const std::vector<double>& analytic) {
    double diff = 0.0;
    double scale = 1e-6;
    for (std::size_t k = 0; k < x.size(); ++k) {
      const double keep = x[k];
      x[k] = keep + h;
      const double up = obj.loss(s, p);
      x[k] = keep - h;
      const double down = obj.loss(s, p);
      x[k] = keep;
      const double fd = (up - down) / (2 * h);
      diff = std::max(diff, std::abs(fd - analytic[k]));
      scale = std::max(scale, std::abs(fd));
    }
    worst = std::max(worst, diff / scale);
  };
  sweep(s, ev.grad_scores);
  sweep(p, ev.grad_params);
  return worst;
}

template <template <class> class Objective, class Noise>
double worst_gradient_error(double lambda0, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  double worst = 0.0;
  for (int rep = 0; rep < 200; ++rep) {
    ComparisonDataset d = random_instance(gen);
    if (lambda0 > 0.0) d = add_virtual_node(d);
    const Objective<Noise> obj(d, lambda0);
    worst = std::max(worst, gradient_error(obj, uniform_vector(gen, d.n_items(), -2, 2),
                                           uniform_vector(gen, d.n_users(), -2, 2)));
  }
  return worst;
}

Outcome criterion_gradients() {
  struct Row {
    const char* name;
    std::function<double(double, std::uint64_t)> run;
  };
  const Row rows[] = {
      {"HBTL", worst_gradient_error<HtmObjective, GumbelNoise>},
      {"HTCV", worst_gradient_error<HtmObjective, NormalNoise>},
      {"CrowdBT", worst_gradient_error<CrowdObjective, GumbelNoise>},
      {"CrowdTCV", worst_gradient_error<CrowdObjective, NormalNoise>},
  };
  Outcome out{Status::Pass, ""};
  std::uint64_t seed = 100;
  for (const Row& row : rows) {
    for (double lambda0 : {0.0, 1.5}) {
      const double err = row.run(lambda0, seed++);
      if (!(err <= 1e-5)) out.status = Status::Fail;
      out.detail += std::string(row.name) + (lambda0 > 0 ? "+L0" : "") + "=" + fmt("%.2e", err) + " ";
    }
  }
  out.detail += "(limit 1e-5, 200 instances each)";
  return out;
}

// ---------------------------------------------------------------- 2

template <class Noise>
void invariance_errors(std::uint64_t seed, double& sign, double& scale, double& shift) {
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> cs(0.1, 10.0);
  std::uniform_real_distribution<double> shifts(-5.0, 5.0);
  for (int rep = 0; rep < 100; ++rep) {
    const ComparisonDataset d = random_instance(gen);
    const HtmObjective<Noise> obj(d, 0.0);
    const auto s = uniform_vector(gen, d.n_items(), -2, 2);
    const auto g = uniform_vector(gen, d.n_users(), -2, 2);
    const double base = obj.loss(s, g);
    auto rel = [&](double v) { return std::abs(v - base) / std::max(1.0, std::abs(base)); };

    std::vector<double> ns(s), ng(g);
    for (double& v : ns) v = -v;
    for (double& v : ng) v = -v;
    sign = std::max(sign, rel(obj.loss(ns, ng)));

    const double c = cs(gen);
    std::vector<double> cs_(s), gc(g);
    for (double& v : cs_) v *= c;
    for (double& v : gc) v /= c;
    scale = std::max(scale, rel(obj.loss(cs_, gc)));

    const double t = shifts(gen);
    std::vector<double> st(s);
    for (double& v : st) v += t;
    shift = std::max(shift, rel(obj.loss(st, g)));
  }
}

Outcome criterion_invariances() {
  double sign = 0.0, scale = 0.0, shift = 0.0;
  invariance_errors<GumbelNoise>(200, sign, scale, shift);
  invariance_errors<NormalNoise>(201, sign, scale, shift);
  // "Exact up to rounding" is read as a few ulps of a loss of order one.
  const bool ok = sign <= 1e-13 && scale <= 1e-10 && shift <= 1e-13;
  return {ok ? Status::Pass : Status::Fail, "sign=" + fmt("%.2e", sign) + " (1e-13) scale=" + fmt("%.2e", scale) +
                                                 " (1e-10) shift=" + fmt("%.2e", shift) + " (1e-13)"};
}

// ---------------------------------------------------------------- 3

template <class Noise>
double worst_convexity_violation(std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  double worst = -INFINITY;
  for (int rep = 0; rep < 500; ++rep) {
    const ComparisonDataset d = random_instance(gen);
    const HtmObjective<Noise> obj(d, 0.0);
    const auto s = uniform_vector(gen, d.n_items(), -2, 2);
    const auto g = uniform_vector(gen, d.n_users(), -2, 2);
    const auto s2 = uniform_vector(gen, d.n_items(), -2, 2);
    const auto g2 = uniform_vector(gen, d.n_users(), -2, 2);
    std::vector<double> sm(s.size()), gm(g.size());
    for (std::size_t i = 0; i < s.size(); ++i) sm[i] = 0.5 * (s[i] + s2[i]);
    for (std::size_t u = 0; u < g.size(); ++u) gm[u] = 0.5 * (g[u] + g2[u]);
    worst = std::max(worst, obj.loss(sm, g) - 0.5 * (obj.loss(s, g) + obj.loss(s2, g)));
    worst = std::max(worst, obj.loss(s, gm) - 0.5 * (obj.loss(s, g) + obj.loss(s, g2)));
  }
  return worst;
}

Outcome criterion_convexity() {
  const double gumbel = worst_convexity_violation<GumbelNoise>(300);
  const double normal = worst_convexity_violation<NormalNoise>(301);
  const bool ok = gumbel <= 1e-12 && normal <= 1e-12;
  return {ok ? Status::Pass : Status::Fail,
          "max(mid - avg) HBTL=" + fmt("%.2e", gumbel) + " HTCV=" + fmt("%.2e", normal) + " (limit 1e-12)"};
}

// ---------------------------------------------------------------- 4-6, 8

GridSpec spot_spec(NoiseKind noise, Setting setting, double gamma_b, double gamma_a,
                   std::initializer_list<Method> methods) {
  GridSpec spec;
  spec.noise = noise;
  spec.settings = {setting};
  spec.alphas = {0.8};
  spec.gamma_bs = {gamma_b};
  spec.gamma_as = {gamma_a};
  spec.trials = 20;
  for (Method m : methods) {
    EstimatorSpec es;
    es.method = m;
    spec.methods.push_back(es);
  }
  return spec;
}

std::string cell_text(const CellMethodStats& st) {
  return std::string(to_string(st.method)) + "=" + fmt("%.3f", st.mean_tau) + "\xC2\xB1" + fmt("%.3f", st.std_tau);
}

bool within(double v, double centre, double tol) { return std::abs(v - centre) <= tol; }

Outcome criterion_table1() {
  const GridResult hard = run_grid(spot_spec(NoiseKind::Gumbel, Setting::Benign, 0.25, 10, {Method::BTL, Method::HBTL}));
  const GridResult flat = run_grid(spot_spec(NoiseKind::Gumbel, Setting::Benign, 2.5, 2.5, {Method::BTL, Method::HBTL}));
  const double btl = hard.at(0, 0).mean_tau;
  const double hbtl = hard.at(0, 1).mean_tau;
  const double gap = std::abs(flat.at(0, 1).mean_tau - flat.at(0, 0).mean_tau);
  const bool a = within(hbtl, 0.964, 0.03);
  const bool b = within(btl, 0.879, 0.04);
  const bool c = gap <= 0.02;
  std::string detail = "(0.25,10): " + cell_text(hard.at(0, 1)) + (a ? " ok" : " MISS 0.964+-0.03") + ", " +
                       cell_text(hard.at(0, 0)) + (b ? " ok" : " MISS 0.879+-0.04") + "; (2.5,2.5): " +
                       cell_text(flat.at(0, 1)) + " " + cell_text(flat.at(0, 0)) + " gap=" + fmt("%.3f", gap) +
                       (c ? " ok" : " MISS <=0.02");
  return {a && b && c ? Status::Pass : Status::Fail, detail};
}

Outcome criterion_table3() {
  const GridResult r =
      run_grid(spot_spec(NoiseKind::Gumbel, Setting::Adversarial, 0.25, 2.5, {Method::BTL, Method::HBTL}));
  const bool a = r.at(0, 0).mean_tau <= 0.55;
  const bool b = r.at(0, 1).mean_tau >= 0.80;
  return {a && b ? Status::Pass : Status::Fail, cell_text(r.at(0, 0)) + (a ? " ok" : " MISS <=0.55") + ", " +
                                                    cell_text(r.at(0, 1)) + (b ? " ok" : " MISS >=0.80")};
}

Outcome criterion_table2() {
  const GridResult r = run_grid(spot_spec(NoiseKind::Normal, Setting::Benign, 0.25, 10, {Method::TCV, Method::HTCV}));
  const bool a = within(r.at(0, 1).mean_tau, 0.971, 0.03);
  const bool b = within(r.at(0, 0).mean_tau, 0.885, 0.04);
  return {a && b ? Status::Pass : Status::Fail, cell_text(r.at(0, 1)) + (a ? " ok" : " MISS 0.971+-0.03") + ", " +
                                                    cell_text(r.at(0, 0)) + (b ? " ok" : " MISS 0.885+-0.04")};
}

Outcome criterion_signs() {
  int matched = 0;
  std::string misses;
  for (int trial = 0; trial < 20; ++trial) {
    SimConfig sim;
    sim.gamma_a = 10;
    sim.gamma_b = 1.0;
    sim.alpha = 0.8;
    sim.setting = Setting::Adversarial;
    sim.seed = static_cast<std::uint64_t>(trial);
    const SimOutput data = generate(sim);
    EstimatorSpec spec;
    spec.method = Method::HBTL;
    const FitResult r = run_estimator(spec, data.data);
    bool all = true;
    for (std::size_t u = 0; u < sim.m; ++u) {
      all = all && (r.state.accuracies[u] > 0) == (data.accuracies[u] > 0);
    }
    if (all) {
      ++matched;
    } else {
      misses += " " + std::to_string(trial);
    }
  }
  return {matched >= 18 ? Status::Pass : Status::Fail,
          "all 9 signs right in " + std::to_string(matched) + "/20 trials (need 18)" +
              (misses.empty() ? "" : ", missed trials:" + misses)};
}

// ---------------------------------------------------------------- 7

struct Shape {
  double start = 0.0;      // log squared error at t = 0
  double plateau = 0.0;    // mean over the last tenth
  double tail_spread = 0.0;
  int phase_end = 0;       // first t within 10% of the total drop from the plateau
  double slope = 0.0;      // least-squares slope over [0, phase_end]
  double r2 = 0.0;
};

Shape describe(const std::vector<TrajectoryPoint>& pts) {
  Shape sh;
  std::vector<double> e;
  for (const TrajectoryPoint& p : pts) e.push_back(log_squared_error(p, ErrorMode::Raw));
  const std::size_t tail = std::max<std::size_t>(1, e.size() / 10);
  double lo = INFINITY, hi = -INFINITY;
  for (std::size_t t = e.size() - tail; t < e.size(); ++t) {
    sh.plateau += e[t] / static_cast<double>(tail);
    lo = std::min(lo, e[t]);
    hi = std::max(hi, e[t]);
  }
  sh.tail_spread = hi - lo;
  sh.start = e.front();
  const double target = sh.plateau + 0.1 * (sh.start - sh.plateau);
  while (sh.phase_end + 1 < static_cast<int>(e.size()) && e[sh.phase_end] > target) ++sh.phase_end;
  const int len = sh.phase_end + 1;
  double mx = 0, my = 0;
  for (int t = 0; t < len; ++t) {
    mx += t / static_cast<double>(len);
    my += e[t] / static_cast<double>(len);
  }
  double sxy = 0, sxx = 0, syy = 0;
  for (int t = 0; t < len; ++t) {
    sxy += (t - mx) * (e[t] - my);
    sxx += (t - mx) * (t - mx);
    syy += (e[t] - my) * (e[t] - my);
  }
  sh.slope = sxx > 0 ? sxy / sxx : 0.0;
  sh.r2 = sxx > 0 && syy > 0 ? sxy * sxy / (sxx * syy) : 0.0;
  return sh;
}

Outcome criterion_trajectory() {
  TrajectorySpec spec;
  spec.iters = 2000;
  spec.warm_start = 0.5;
  const std::vector<TrajectoryRun> runs = run_trajectories(spec);
  const std::size_t tail = static_cast<std::size_t>(spec.iters) / 10;
  const double p02 = trajectory_plateau(runs, 0.2, tail, ErrorMode::Raw);
  const double p08 = trajectory_plateau(runs, 0.8, tail, ErrorMode::Raw);
  // The single-run shape check uses the first alpha = 0.8 run.
  const TrajectoryRun* one = nullptr;
  for (const TrajectoryRun& r : runs) {
    if (r.alpha == 0.8 && !one) one = &r;
  }
  const Shape sh = describe(one->points);
  const double drop = sh.start - sh.plateau;
  const bool decreasing = drop >= 1.0 && sh.slope < 0.0;
  const bool linear = sh.r2 >= 0.9 && sh.phase_end >= 5;
  const bool flat = sh.tail_spread <= 0.05 * drop && sh.phase_end < spec.iters / 2;
  const bool ordered = p08 < p02;
  std::string detail = "run alpha=0.8 seed=" + std::to_string(one->seed) + ": start=" + fmt("%.3f", sh.start) +
                       " plateau=" + fmt("%.3f", sh.plateau) + " linear phase t<=" + std::to_string(sh.phase_end) +
                       " slope=" + fmt("%.4f", sh.slope) + " R2=" + fmt("%.3f", sh.r2) +
                       " tail spread=" + fmt("%.2e", sh.tail_spread) + "; plateau(0.2)=" + fmt("%.3f", p02) +
                       " plateau(0.8)=" + fmt("%.3f", p08);
  if (!decreasing) detail += " [no clear decrease]";
  if (!linear) detail += " [first phase not linear]";
  if (!flat) detail += " [no plateau]";
  if (!ordered) detail += " [plateau not lower at alpha=0.8]";
  return {decreasing && linear && flat && ordered ? Status::Pass : Status::Fail, detail};
}

// ---------------------------------------------------------------- 9

Outcome criterion_country() {
  const std::string dir = HETRANK_DATA_DIR;
  const std::string log_path = dir + "/country_population_comparisons.csv";
  if (std::filesystem::exists(log_path)) {
    return {Status::Fail, "comparison log present at " + log_path + " but the real-data run is not wired up"};
  }
  const std::string path = dir + "/country_population_truth.csv";
  const std::vector<TruthEntry> truth = load_truth_csv(path);
  bool ok = truth.size() == 15;
  for (const TruthEntry& e : truth) ok = ok && e.score > 0.0;
  const std::string copy = (std::filesystem::temp_directory_path() / "hetrank_country_roundtrip.csv").string();
  write_truth_csv(truth, copy);
  const std::vector<TruthEntry> again = load_truth_csv(copy);
  std::filesystem::remove(copy);
  ok = ok && again.size() == truth.size();
  for (std::size_t k = 0; ok && k < truth.size(); ++k) {
    ok = again[k].item == truth[k].item && again[k].score == truth[k].score;
  }
  ScoreVector scores;
  for (const TruthEntry& e : truth) scores.push_back(e.score);
  const Ranking order = ground_truth_ranking(scores);
  const std::string top = truth[order.front()].item;
  if (!ok) return {Status::Fail, "truth fixture failed schema or round-trip validation: " + path};
  return {Status::Skip, "no comparison log shipped; truth fixture validated (15 countries, top " + top +
                            ", lossless round-trip)"};
}

// ---------------------------------------------------------------- 10

Outcome criterion_small_mle() {
  // One user, three items, every ordered pair observed; counts[w][l] = number
  // of times w beat l.
  const int counts[3][3] = {{0, 3, 4}, {1, 0, 2}, {1, 1, 0}};
  std::vector<Comparison> records;
  int k = 0;
  for (ItemId w = 0; w < 3; ++w) {
    for (ItemId l = 0; l < 3; ++l) {
      for (int r = 0; r < counts[w][l]; ++r) records.push_back({0, w, l});
      k += counts[w][l];
    }
  }
  const ComparisonDataset data(3, 1, records);
  SolverConfig cfg;
  cfg.freeze_params = true;
  cfg.max_iters = 20000;
  cfg.grad_tol = 1e-12;
  const FitResult r = fit(data, NoiseKind::Gumbel, cfg);

  // Brute force over s = (a, b, -a - b), written out directly from the
  // logistic likelihood rather than through the library.
  auto loss = [&](double a, double b) {
    const double s[3] = {a, b, -a - b};
    double acc = 0.0;
    for (int w = 0; w < 3; ++w)
      for (int l = 0; l < 3; ++l)
        if (counts[w][l] > 0) acc += counts[w][l] * std::log1p(std::exp(-(s[w] - s[l])));
    return acc / k;
  };
  double best = INFINITY, best_a = 0, best_b = 0;
  for (int i = 0; i <= 4000; ++i) {
    const double a = -2.0 + 1e-3 * i;
    for (int j = 0; j <= 4000; ++j) {
      const double b = -2.0 + 1e-3 * j;
      const double v = loss(a, b);
      if (v < best) {
        best = v;
        best_a = a;
        best_b = b;
      }
    }
  }
  const double grid[3] = {best_a, best_b, -best_a - best_b};
  double dist = 0.0;
  for (int i = 0; i < 3; ++i) dist = std::max(dist, std::abs(r.state.scores[i] - grid[i]));
  return {dist <= 5e-3 ? Status::Pass : Status::Fail,
          "GD s=(" + fmt("%.4f", r.state.scores[0]) + "," + fmt("%.4f", r.state.scores[1]) + "," +
              fmt("%.4f", r.state.scores[2]) + ") grid s=(" + fmt("%.3f", grid[0]) + "," + fmt("%.3f", grid[1]) +
              "," + fmt("%.3f", grid[2]) + ") max diff=" + fmt("%.2e", dist) + " (limit 5e-3)"};
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    Outcome (*run)();
  };
  const Criterion criteria[] = {
      {1, "gradient oracle", criterion_gradients},
      {2, "loss invariances", criterion_invariances},
      {3, "separate convexity", criterion_convexity},
      {4, "benign Gumbel spot cells", criterion_table1},
      {5, "adversarial spot cell", criterion_table3},
      {6, "normal-noise spot cell", criterion_table2},
      {7, "error trajectory shape", criterion_trajectory},
      {8, "adversarial sign recovery", criterion_signs},
      {9, "country population", criterion_country},
      {10, "small-instance MLE", criterion_small_mle},
  };
  int failed = 0;
  for (const Criterion& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {Status::Fail, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const char* tag = o.status == Status::Pass ? "PASS" : o.status == Status::Fail ? "FAIL" : "SKIP";
    if (o.status == Status::Fail) ++failed;
    std::printf("%s criterion %d (%s) [%.1fs]: %s\n", tag, c.id, c.name, secs, o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d criteria failed\n", failed);
  return failed == 0 ? 0 : 1;
}
