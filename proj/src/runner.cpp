#include "khom/runner.hpp"

#include <nlohmann/json.hpp>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

namespace khom {

namespace fs = std::filesystem;

std::string fnv1a_hex(const std::string& data) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << h;
  return os.str();
}

namespace {

std::uint64_t fnv1a_u64(const std::string& data) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

json default_config() {
  return json{
      {"operator", {{"preset", "dirac"}, {"k", 1}}},
      {"spec", {{"k", 1}, {"N", 512}, {"L", 2.0}, {"H", "identity"}, {"f", "flat"}}},
      {"chi", {{"tag", "x_over_sqrt"}, {"epsilon", 0.3}}},
      {"ladder", {8, 16, 32, 64, 128}},
      {"policy", {{"j_star", 50}, {"tau", 1e-3}, {"drift", 0.05}}},
      {"slow_policy", {{"j_star", 50}, {"tau", 0.1}, {"drift", 0.05}}},
      {"seed", 20240901},
      {"index", {{"windings", {-3, -2, -1, 0, 1, 2, 3}}}},
      {"propagate",
       {{"cutoff", 128},
        {"arc_width", 0.5},
        {"margin", 0.4},
        {"assert_up_to", 0.35},
        {"s_values", {-0.35, -0.2, -0.1, 0.0, 0.1, 0.2, 0.35}}}},
      {"molly",
       {{"grid", 1024}, {"scales", {0.1, 0.05, 0.025}}, {"profile_radius", 1.0},
        {"random_sections", 50}}},
      {"garding", {{"trials", 1000}, {"band", 40}, {"min_c", 0.999999999}}},
      {"lemma1035", {{"cutoff", 16}, {"pairs", 20}}},
      {"disjoint", {{"gap", 1.0}, {"width", 0.5}, {"epsilon", 0.1}}},
      {"checks", {"symbol", "assemble", "funcalc", "normalize", "verify", "index",
                  "propagate", "molly", "garding", "lemma1035"}},
  };
}

std::string now_iso() {
  auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::ostringstream os;
  os << std::put_time(std::gmtime(&t), "%FT%TZ");
  return os.str();
}

void write_text(const fs::path& p, const std::string& text) {
  std::ofstream f(p);
  if (!f) throw input_error("cannot write " + p.string());
  f << text;
}

void write_report(const RunConfig& cfg, const std::string& suite, json body) {
  body["suite"] = suite;
  body["config_hash"] = cfg.config_hash;
  body["seed"] = cfg.seed;
  body["timestamp"] = now_iso();
  fs::create_directories(cfg.out_dir);
  write_text(fs::path(cfg.out_dir) / (suite + ".json"), body.dump(2) + "\n");
}

std::string fmt(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

std::string matrix_csv(const Mat& m) {
  std::ostringstream os;
  os << std::setprecision(17);
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      if (c) os << ",";
      os << '"' << m(r, c).real() << "," << m(r, c).imag() << '"';
    }
    os << "\n";
  }
  return os.str();
}

Rng suite_rng(const RunConfig& cfg, const std::string& suite) {
  return Rng(cfg.seed ^ fnv1a_u64(suite));
}

json decay_values_json(const DecayReport& rep) {
  json sv = json::object();
  for (const auto& [cut, vals] : rep.singular_values) sv[std::to_string(cut)] = vals;
  return sv;
}

json decay_report_json(const DecayReport& rep) {
  return json{{"singular_values", decay_values_json(rep)},
              {"verdict", rep.verdict},
              {"tail_ratio", rep.tail_ratio},
              {"worst_drift", rep.worst_drift}};
}

Vec winding_multiplier(int w, int N) {
  Vec u(N);
  for (int j = 0; j < N; ++j) u[j] = std::exp(kI * static_cast<double>(w) * (kTwoPi * j / N));
  return u;
}

}  // namespace

RunConfig RunConfig::load(const std::string& path, const std::string& out_dir,
                          std::optional<std::uint64_t> seed_override, bool parallel) {
  std::ifstream f(path);
  if (!f) throw input_error("cannot open config file " + path);
  json doc;
  try {
    f >> doc;
  } catch (const std::exception& e) {
    throw input_error(std::string("config parse error: ") + e.what());
  }
  return from_json(std::move(doc), out_dir, seed_override, parallel);
}

RunConfig RunConfig::from_json(json doc, const std::string& out_dir,
                               std::optional<std::uint64_t> seed_override, bool parallel) {
  RunConfig cfg;
  cfg.raw = default_config();
  cfg.raw.merge_patch(doc);
  if (seed_override) cfg.raw["seed"] = *seed_override;
  cfg.seed = cfg.raw.at("seed").get<std::uint64_t>();
  cfg.out_dir = out_dir.empty() ? "khom-out" : out_dir;
  cfg.parallel_ladder = parallel;
  cfg.config_hash = fnv1a_hex(cfg.raw.dump());
  return cfg;
}

CircleBundleSpec RunConfig::make_spec() const { return spec_from_json(raw.at("spec")); }

DiffOp RunConfig::make_operator(const CircleBundleSpec& spec) const {
  const json& op = raw.at("operator");
  if (op.contains("preset")) {
    std::string preset = op.at("preset").get<std::string>();
    int k = op.value("k", spec.k);
    if (preset == "dirac") return dirac(k, spec.N);
    if (preset == "graded_dirac") return graded_dirac(spec.N);
    if (preset == "ddtheta") {
      DiffOp d;
      d.A.assign(spec.N, Mat::Identity(k, k));
      d.B.assign(spec.N, Mat::Zero(k, k));
      return d;
    }
    if (preset.rfind("potential:", 0) == 0) {
      std::string name = preset.substr(10);
      std::vector<Mat> V(spec.N);
      for (int j = 0; j < spec.N; ++j) {
        double th = kTwoPi * j / spec.N;
        double v;
        if (name == "cos") v = std::cos(th);
        else if (name == "sin") v = std::sin(th);
        else if (name == "well") v = 1.0 + 0.5 * std::cos(th) + 0.25 * std::cos(2 * th);
        else throw input_error("unknown potential preset: " + name);
        V[j] = v * Mat::Identity(spec.k, spec.k);
      }
      return multiplication_op(std::move(V));
    }
    throw input_error("unknown operator preset: " + preset);
  }
  return diffop_from_json(op, spec.N);
}

NormalizingFn RunConfig::make_chi() const {
  const json& c = raw.at("chi");
  auto tag = NormalizingFn::parse_tag(c.at("tag").get<std::string>());
  return NormalizingFn::build(c.value("epsilon", 0.3), tag);
}

std::vector<int> RunConfig::ladder() const {
  return raw.at("ladder").get<std::vector<int>>();
}

DecayPolicy RunConfig::policy() const {
  const json& p = raw.at("policy");
  return DecayPolicy{p.value("drift", 0.05), p.value("j_star", 50), p.value("tau", 1e-3)};
}

DecayPolicy RunConfig::slow_policy() const {
  const json& p = raw.at("slow_policy");
  return DecayPolicy{p.value("drift", 0.05), p.value("j_star", 50), p.value("tau", 0.1)};
}

json spec_to_json(const CircleBundleSpec& spec) {
  json j{{"k", spec.k}, {"N", spec.N}, {"L", spec.L}};
  bool ident = true, flat = true;
  for (int l = 0; l < spec.N && (ident || flat); ++l) {
    if ((spec.H[l] - Mat::Identity(spec.k, spec.k)).cwiseAbs().maxCoeff() > 0) ident = false;
    if (spec.f[l] != 1.0) flat = false;
  }
  if (ident) {
    j["H"] = "identity";
  } else {
    json arr = json::array();
    for (const auto& h : spec.H) {
      json m = json::array();
      for (int r = 0; r < spec.k; ++r) {
        json row = json::array();
        for (int c = 0; c < spec.k; ++c)
          row.push_back({h(r, c).real(), h(r, c).imag()});
        m.push_back(row);
      }
      arr.push_back(m);
    }
    j["H"] = arr;
  }
  if (flat) {
    j["f"] = "flat";
  } else {
    j["f"] = std::vector<double>(spec.f.data(), spec.f.data() + spec.f.size());
  }
  return j;
}

CircleBundleSpec spec_from_json(const json& j) {
  int k = j.at("k").get<int>();
  int N = j.at("N").get<int>();
  double L = j.at("L").get<double>();
  std::vector<Mat> H;
  if (j.at("H").is_string() && j.at("H").get<std::string>() == "identity") {
    H.assign(N, Mat::Identity(k, k));
  } else {
    for (const auto& m : j.at("H")) {
      Mat h(k, k);
      for (int r = 0; r < k; ++r)
        for (int c = 0; c < k; ++c)
          h(r, c) = cxd(m.at(r).at(c).at(0).get<double>(), m.at(r).at(c).at(1).get<double>());
      H.push_back(h);
    }
  }
  RVec f(N);
  if (j.at("f").is_string() && j.at("f").get<std::string>() == "flat") {
    f.setOnes();
  } else {
    auto v = j.at("f").get<std::vector<double>>();
    if (static_cast<int>(v.size()) != N) throw input_error("spec_from_json: f length mismatch");
    for (int i = 0; i < N; ++i) f[i] = v[i];
  }
  return CircleBundleSpec(k, N, L, std::move(H), std::move(f));
}

namespace {
json mat_to_json(const Mat& m) {
  json out = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back({m(r, c).real(), m(r, c).imag()});
    out.push_back(row);
  }
  return out;
}
Mat mat_from_json(const json& j) {
  Eigen::Index rows = j.size(), cols = j.at(0).size();
  Mat m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r)
    for (Eigen::Index c = 0; c < cols; ++c)
      m(r, c) = cxd(j.at(r).at(c).at(0).get<double>(), j.at(r).at(c).at(1).get<double>());
  return m;
}
}  // namespace

json diffop_to_json(const DiffOp& d) {
  json j;
  json a = json::array(), b = json::array();
  for (const auto& m : d.A) a.push_back(mat_to_json(m));
  for (const auto& m : d.B) b.push_back(mat_to_json(m));
  j["A"] = a;
  j["B"] = b;
  if (d.grading) j["grading"] = mat_to_json(*d.grading);
  return j;
}

DiffOp diffop_from_json(const json& j, int expected_N) {
  DiffOp d;
  for (const auto& m : j.at("A")) d.A.push_back(mat_from_json(m));
  for (const auto& m : j.at("B")) d.B.push_back(mat_from_json(m));
  if (j.contains("grading")) d.grading = mat_from_json(j.at("grading"));
  if (d.N() != expected_N) throw input_error("diffop_from_json: sample count mismatch");
  d.validate();
  return d;
}

json section_to_json(const Section& s) {
  json comps = json::array();
  for (int r = 0; r < s.k(); ++r) {
    json arr = json::array();
    for (int j = 0; j < s.N(); ++j)
      arr.push_back({s.samples(r, j).real(), s.samples(r, j).imag()});
    comps.push_back(arr);
  }
  return comps;
}

Section section_from_json(const json& j) {
  int k = j.size(), N = j.at(0).size();
  Mat m(k, N);
  for (int r = 0; r < k; ++r)
    for (int c = 0; c < N; ++c)
      m(r, c) = cxd(j.at(r).at(c).at(0).get<double>(), j.at(r).at(c).at(1).get<double>());
  return Section(std::move(m));
}

namespace {

int suite_symbol(RunConfig& cfg) {
  CircleBundleSpec spec = cfg.make_spec();
  DiffOp d = cfg.make_operator(spec);
  EllipticityReport ell = is_elliptic(d);

  std::ostringstream csv;
  csv << "theta,abs_det_symbol\n";
  for (int j = 0; j < spec.N; ++j) {
    SymbolValue s = symbol(d, spec.theta(j), 1.0);
    csv << fmt(spec.theta(j)) << "," << fmt(std::abs(s.matrix.determinant())) << "\n";
  }
  fs::create_directories(cfg.out_dir);
  write_text(fs::path(cfg.out_dir) / "symbol.csv", csv.str());

  // homogeneity spot-check at a few covectors
  double homo = 0.0;
  for (double xi : {0.5, 2.0, -3.0}) {
    SymbolValue s1 = symbol(d, 1.0, xi);
    SymbolValue sb = symbol(d, 1.0, 1.0);
    homo = std::max(homo, (s1.matrix - xi * sb.matrix).cwiseAbs().maxCoeff());
  }
  json body{{"elliptic", ell.elliptic},
            {"min_abs_det", ell.min_abs_det},
            {"homogeneity_residual", homo},
            {"verdict", ell.elliptic && homo < 1e-12}};
  write_report(cfg, "symbol", body);
  return body["verdict"].get<bool>() ? 0 : 1;
}

int suite_assemble(RunConfig& cfg) {
  CircleBundleSpec spec = cfg.make_spec();
  DiffOp d = cfg.make_operator(spec);
  auto ladder = cfg.ladder();
  auto ops = refine_ladder(d, spec, ladder, cfg.parallel_ladder);

  std::ostringstream csv;
  csv << "cutoff,rank,eigenvalue\n";
  json residuals = json::object();
  json manifest{{"cutoffs", ladder}, {"checksums", json::object()}};
  fs::create_directories(cfg.out_dir);
  for (std::size_t i = 0; i < ops.size(); ++i) {
    const auto& dec = ops[i].eig();
    for (Eigen::Index r = 0; r < dec.lambda.size(); ++r)
      csv << ladder[i] << "," << r << "," << fmt(dec.lambda[r]) << "\n";
    residuals[std::to_string(ladder[i])] = ops[i].hermiticity_residual;
    std::string mat_csv = matrix_csv(ops[i].white);
    std::string fname = "white_M" + std::to_string(ladder[i]) + ".csv";
    write_text(fs::path(cfg.out_dir) / fname, mat_csv);
    manifest["checksums"][std::to_string(ladder[i])] = fnv1a_hex(mat_csv);
  }
  write_text(fs::path(cfg.out_dir) / "spectra.csv", csv.str());
  write_text(fs::path(cfg.out_dir) / "ladder_manifest.json", manifest.dump(2) + "\n");

  Rng rng = suite_rng(cfg, "assemble");
  ResolventReport res = resolvent_check(ops.back(), rng);
  bool herm_ok = true;
  for (const auto& [_, r] : residuals.items()) herm_ok = herm_ok && r.get<double>() < 1e-8;
  bool verdict = herm_ok && res.norm_plus <= 1.0 + 1e-12 && res.norm_minus <= 1.0 + 1e-12 &&
                 res.identity_residual < 1e-10;
  json body{{"hermiticity_residuals", residuals},
            {"resolvent",
             {{"norm_plus", res.norm_plus},
              {"norm_minus", res.norm_minus},
              {"identity_residual", res.identity_residual}}},
            {"verdict", verdict}};
  write_report(cfg, "assemble", body);
  return verdict ? 0 : 1;
}

int suite_funcalc(RunConfig& cfg) {
  CircleBundleSpec spec = cfg.make_spec();
  DiffOp d = cfg.make_operator(spec);
  int M = cfg.ladder().back();
  DiscreteOperator op = assemble(d, spec, M);
  const Eigen::Index dim = op.basis.dim();

  Mat U = cayley(op);
  double unit_res = op_norm((U.adjoint() * U - Mat::Identity(dim, dim)).eval());
  InverseCayleyResult inv = inverse_cayley(U);
  double roundtrip = op_norm(inv.hermitian - op.white);

  double lmax = std::max(std::abs(op.eig().lambda[0]), std::abs(op.eig().lambda[dim - 1]));
  double analytic_min_dist = std::abs(cayley_scalar(lmax) - cxd(1, 0));

  Mat e1 = unitary_group(op, 0.3, false), e2 = unitary_group(op, 0.45, false);
  Mat e12 = unitary_group(op, 0.75, false);
  double group_res = op_norm(e1 * e2 - e12);
  double id_res = op_norm(unitary_group(op, 0.0) - Mat::Identity(dim, dim));
  double fc_id = op_norm(func_calc(op, [](double x) { return cxd(x, 0); }) - op.white);

  // named presets: ||h(Hhat)|| equals max |h| over the spectrum
  double preset_res = 0.0;
  for (const std::string name :
       {"id", "arctan", "sqrt_rational", "exp", "cayley", "sign_smooth:1"}) {
    ScalarFn h = parse_function_preset(name);
    Mat hm = func_calc(op, h);
    double sup = 0.0;
    for (Eigen::Index i = 0; i < op.eig().lambda.size(); ++i)
      sup = std::max(sup, std::abs(h(op.eig().lambda[i])));
    preset_res = std::max(preset_res, std::abs(op_norm(hm) - sup) / sup);
  }

  bool verdict = unit_res < 1e-10 && roundtrip < 1e-9 && group_res < 1e-10 &&
                 id_res < 1e-12 && fc_id < 1e-10 && inv.min_dist_to_one > 0 &&
                 preset_res < 1e-9;
  json body{{"cayley_unitarity_residual", unit_res},
            {"cayley_roundtrip_residual", roundtrip},
            {"min_dist_to_one", inv.min_dist_to_one},
            {"analytic_min_dist_to_one", analytic_min_dist},
            {"group_law_residual", group_res},
            {"group_identity_residual", id_res},
            {"funccalc_id_residual", fc_id},
            {"preset_norm_residual", preset_res},
            {"verdict", verdict}};
  write_report(cfg, "funcalc", body);
  return verdict ? 0 : 1;
}

int suite_normalize(RunConfig& cfg) {
  NormalizingFn chi = cfg.make_chi();

  json body;
  body["tag"] = NormalizingFn::tag_name(chi.tag());
  bool verdict = true;
  if (chi.band_limited()) {
    const auto& xs = chi.table_x();
    const auto& cs = chi.table_chi();
    std::ostringstream csv;
    csv << "x,chi\n";
    for (std::size_t i = 0; i < xs.size(); ++i) csv << fmt(xs[i]) << "," << fmt(cs[i]) << "\n";
    fs::create_directories(cfg.out_dir);
    write_text(fs::path(cfg.out_dir) / "chi_table.csv", csv.str());

    double odd_res = 0.0, max_abs = 0.0;
    bool positive = true;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      max_abs = std::max(max_abs, std::abs(cs[i]));
      odd_res = std::max(odd_res, std::abs(cs[i] + cs[xs.size() - 1 - i]));
      if (xs[i] > 0 && cs[i] <= 0) positive = false;
    }
    double eps = chi.epsilon();
    double probe_worst = 0.0;
    for (int p = 0; p < 10; ++p) {
      double center = (1.5 + 0.35 * p) * eps * (p % 2 == 0 ? 1.0 : -1.0);
      double radius = 0.4 * eps;
      TestFunction phi = bump_test(center, radius);
      auto w = [&phi](double x) { return cxd(phi.f(x), 0.0); };
      double maxphi = std::abs(phi.f(center));
      probe_worst = std::max(probe_worst, std::abs(chi.pair_fourier(w)) / maxphi);
    }
    TestFunction straddle = bump_test(0.05 * eps, 0.5 * eps);
    double straddle_val =
        std::abs(chi.pair_fourier([&straddle](double x) { return cxd(straddle.f(x), 0.0); }));

    verdict = odd_res < 1e-10 && max_abs <= 1.0 + 1e-10 && positive &&
              chi.table_edge_value() > 0.9 && chi.max_formula_disagreement() < 1e-6 &&
              probe_worst < 1e-6;
    body["odd_residual"] = odd_res;
    body["max_abs"] = max_abs;
    body["positive_on_positive_axis"] = positive;
    body["table_edge"] = chi.table_edge_value();
    body["formula_disagreement"] = chi.max_formula_disagreement();
    body["support_probe_worst"] = probe_worst;
    body["support_probe_straddle"] = straddle_val;
    body["epsilon"] = eps;
    body["fourier_support_radius"] = chi.fourier_support_radius();
    body["params"] = json{{"tag", "gg-bump"},
                          {"epsilon", eps},
                          {"bump_radius", 1.0},
                          {"bandwidth", 2.0},
                          {"table_points", chi.table_x().size()},
                          {"table_range", chi.table_x().back()}};
  } else {
    double odd_res = 0.0, max_abs = 0.0;
    bool positive = true;
    for (double x = 0.125; x < 100; x *= 2) {
      odd_res = std::max(odd_res, std::abs(chi(x) + chi(-x)));
      max_abs = std::max(max_abs, std::abs(chi(x)));
      if (chi(x) <= 0) positive = false;
    }
    verdict = odd_res < 1e-12 && max_abs <= 1.0 && positive && chi(1e6) > 1.0 - 1e-5;
    body["odd_residual"] = odd_res;
    body["max_abs"] = max_abs;
    body["positive_on_positive_axis"] = positive;
    body["asymptote_at_1e6"] = chi(1e6);
  }
  body["verdict"] = verdict;
  write_report(cfg, "normalize", body);
  return verdict ? 0 : 1;
}

int suite_verify(RunConfig& cfg) {
  CircleBundleSpec spec = cfg.make_spec();
  DiffOp d = cfg.make_operator(spec);
  NormalizingFn chi = cfg.make_chi();
  Rng rng = suite_rng(cfg, "verify");
  FredholmModuleData mod =
      build_module(d, spec, chi, cfg.ladder(), rng, cfg.parallel_ladder);
  ModuleVerification v = verify_module(mod, cfg.policy());

  json commutators = json::object();
  json diag = json::object();
  diag["f2_minus_1"] = json{{"verdict", v.f2_minus_1.verdict},
                            {"tail_ratio", v.f2_minus_1.tail_ratio},
                            {"worst_drift", v.f2_minus_1.worst_drift}};
  std::ostringstream csv;
  csv << "report,cutoff,rank,singular_value\n";
  for (const auto& [cut, vals] : v.f2_minus_1.singular_values)
    for (std::size_t r = 0; r < vals.size(); ++r)
      csv << "f2_minus_1," << cut << "," << r << "," << fmt(vals[r]) << "\n";
  for (const auto& [name, rep] : v.commutators) {
    commutators[name] = decay_values_json(rep);
    diag[name] = json{{"verdict", rep.verdict},
                      {"tail_ratio", rep.tail_ratio},
                      {"worst_drift", rep.worst_drift}};
    for (const auto& [cut, vals] : rep.singular_values)
      for (std::size_t r = 0; r < vals.size(); ++r)
        csv << "comm_" << name << "," << cut << "," << r << "," << fmt(vals[r]) << "\n";
  }
  fs::create_directories(cfg.out_dir);
  write_text(fs::path(cfg.out_dir) / "singular_values.csv", csv.str());

  DecayPolicy pol = cfg.policy();
  json body{{"selfadjoint_residual", v.selfadjoint_residual},
            {"f2_minus_1", decay_values_json(v.f2_minus_1)},
            {"commutators", commutators},
            {"verdict", v.verdict},
            {"policy", {{"j_star", pol.j_star}, {"tau", pol.tau}, {"drift", pol.drift}}},
            {"diagnostics", diag}};
  write_report(cfg, "verify", body);
  return v.verdict ? 0 : 1;
}

int suite_index(RunConfig& cfg) {
  CircleBundleSpec spec = cfg.make_spec();
  DiffOp d = cfg.make_operator(spec);
  NormalizingFn chi = cfg.make_chi();
  Rng rng = suite_rng(cfg, "index");
  FredholmModuleData mod =
      build_module(d, spec, chi, cfg.ladder(), rng, cfg.parallel_ladder);

  bool verdict = true;
  json results = json::array();
  for (int w : cfg.raw.at("index").at("windings").get<std::vector<int>>()) {
    Vec u = winding_multiplier(w, spec.N);
    IndexResult res = index_pairing(mod, u);
    int oracle = winding_number(u);
    bool ok = res.index == -w && oracle == w;
    verdict = verdict && ok;
    results.push_back(json{{"winding", w},
                           {"index", res.index},
                           {"ker", res.ker},
                           {"coker", res.coker},
                           {"ladder", res.ladder_indices},
                           {"gap", res.spectral_gap},
                           {"winding_oracle", oracle},
                           {"ok", ok}});
  }
  json body{{"results", results}, {"verdict", verdict}};
  write_report(cfg, "index", body);
  return verdict ? 0 : 1;
}

int suite_propagate(RunConfig& cfg) {
  CircleBundleSpec spec = cfg.make_spec();
  DiffOp d = cfg.make_operator(spec);
  const json& p = cfg.raw.at("propagate");
  double width = p.at("arc_width").get<double>();
  double margin = p.at("margin").get<double>();
  double assert_up_to = p.at("assert_up_to").get<double>();
  int cutoff = p.at("cutoff").get<int>();
  auto svals = p.at("s_values").get<std::vector<double>>();

  double center = M_PI;
  Section u = Section::zero(spec.k, spec.N);
  RVec bump = arc_bump(spec.N, center, width);
  for (int j = 0; j < spec.N; ++j) u.samples(0, j) = bump[j];

  PropagationReport rep = propagation_check(d, spec, u, center, width, margin, svals, cutoff);

  std::ostringstream csv;
  csv << "s,outside_mass\n";
  bool mass_ok = true;
  for (std::size_t i = 0; i < svals.size(); ++i) {
    csv << fmt(svals[i]) << "," << fmt(rep.outside_mass[i]) << "\n";
    if (std::abs(svals[i]) <= assert_up_to && rep.outside_mass[i] >= 1e-6) mass_ok = false;
  }
  fs::create_directories(cfg.out_dir);
  write_text(fs::path(cfg.out_dir) / "propagate.csv", csv.str());

  bool verdict = mass_ok && rep.rotation_oracle_residual < 1e-9;
  json body{{"epsilon_predicted", rep.epsilon_predicted},
            {"outside_mass", rep.outside_mass},
            {"s_values", rep.s_values},
            {"rotation_oracle_residual", rep.rotation_oracle_residual},
            {"verdict", verdict}};
  write_report(cfg, "propagate", body);
  return verdict ? 0 : 1;
}

int suite_molly(RunConfig& cfg) {
  const json& m = cfg.raw.at("molly");
  int grid = m.at("grid").get<int>();
  double a = m.at("profile_radius").get<double>();
  auto scales = m.at("scales").get<std::vector<double>>();
  int nrand = m.at("random_sections").get<int>();

  Rng rng = suite_rng(cfg, "molly");
  MollifierSuiteReport suite = mollifier_suite(a, scales, grid, nrand, 8, rng);

  RVec f(grid);
  for (int j = 0; j < grid; ++j) f[j] = std::sin(kTwoPi * j / grid);
  CommutatorBoundReport comm = mollifier_commutator_bound(a, scales, f, grid);

  bool verdict = suite.norms_bounded && suite.strictly_decreasing && comm.verdict &&
                 comm.variation < 0.10;
  json body{{"max_norm_ratio", suite.max_norm_ratio},
            {"operator_norms", suite.operator_norms},
            {"strictly_decreasing", suite.strictly_decreasing},
            {"commutator_norms", comm.numeric_norms},
            {"schur_bound", comm.schur_bound},
            {"commutator_variation", comm.variation},
            {"verdict", verdict}};
  write_report(cfg, "molly", body);
  return verdict ? 0 : 1;
}

int suite_garding(RunConfig& cfg) {
  CircleBundleSpec spec = cfg.make_spec();
  DiffOp d = cfg.make_operator(spec);
  const json& g = cfg.raw.at("garding");
  Rng rng = suite_rng(cfg, "garding");
  GardingEstimate est = garding_estimate(d, spec, g.at("trials").get<int>(),
                                         g.at("band").get<int>(), rng);
  DecayReport rel = rellich_report(spec, cfg.ladder(), cfg.slow_policy());

  Atlas2 atlas = make_partition(spec.N);
  bool chart_ok = true;
  double worst_chart = 0.0;
  for (int t = 0; t < 100; ++t) {
    Section u = random_band_limited(spec.k, spec.N, g.at("band").get<int>(), rng);
    double lhs = l2_norm(u, spec);
    double rhs = std::sqrt(2.0 * spec.L) * sobolev_norm_chart(u, atlas, spec);
    worst_chart = std::max(worst_chart, lhs / rhs);
    if (lhs > rhs * (1 + 1e-12)) chart_ok = false;
  }

  std::ostringstream csv;
  csv << "cutoff,rank,singular_value\n";
  for (const auto& [cut, vals] : rel.singular_values)
    for (std::size_t r = 0; r < vals.size(); ++r)
      csv << cut << "," << r << "," << fmt(vals[r]) << "\n";
  fs::create_directories(cfg.out_dir);
  write_text(fs::path(cfg.out_dir) / "rellich.csv", csv.str());

  bool verdict = est.c_measured >= g.at("min_c").get<double>() && rel.verdict && chart_ok;
  json body{{"c_measured", est.c_measured},
            {"worst_trial", est.worst_trial},
            {"rellich", decay_report_json(rel)},
            {"chart_inequality_ok", chart_ok},
            {"chart_ratio_worst", worst_chart},
            {"verdict", verdict}};
  write_report(cfg, "garding", body);
  return verdict ? 0 : 1;
}

int suite_lemma1035(RunConfig& cfg) {
  CircleBundleSpec spec = cfg.make_spec();
  DiffOp d = cfg.make_operator(spec);
  const json& l = cfg.raw.at("lemma1035");
  int cutoff = l.at("cutoff").get<int>();
  int pairs = l.at("pairs").get<int>();
  DiscreteOperator op = assemble(d, spec, cutoff);

  NormalizingFn chi = cfg.make_chi();
  if (!chi.band_limited()) chi = NormalizingFn::build(0.3, NormalizingFn::Tag::gg_bump);

  Rng rng = suite_rng(cfg, "lemma1035");
  const Eigen::Index dim = op.basis.dim();

  // exact eigenvector case
  Vec ev = op.eig().V.col(dim / 2);
  Lemma1035Report eig_case = lemma_10_3_5_check(op, chi, ev, ev);

  double worst = 0.0;
  for (int t = 0; t < pairs; ++t) {
    Vec u = rng.cnormal_vec(dim);
    Vec v = rng.cnormal_vec(dim);
    u /= u.norm();
    v /= v.norm();
    Lemma1035Report r = lemma_10_3_5_check(op, chi, u, v);
    worst = std::max(worst, r.residual);
  }
  bool verdict = eig_case.residual < 1e-10 && worst < 1e-6;
  json body{{"eigenvector_residual", eig_case.residual},
            {"worst_random_residual", worst},
            {"pairs", pairs},
            {"verdict", verdict}};
  write_report(cfg, "lemma1035", body);
  return verdict ? 0 : 1;
}

}  // namespace

int run_subcommand(const std::string& name, RunConfig& cfg) {
  if (name == "symbol") return suite_symbol(cfg);
  if (name == "assemble") return suite_assemble(cfg);
  if (name == "funcalc") return suite_funcalc(cfg);
  if (name == "normalize") return suite_normalize(cfg);
  if (name == "verify") return suite_verify(cfg);
  if (name == "index") return suite_index(cfg);
  if (name == "propagate") return suite_propagate(cfg);
  if (name == "molly") return suite_molly(cfg);
  if (name == "garding") return suite_garding(cfg);
  if (name == "lemma1035") return suite_lemma1035(cfg);
  if (name == "all") {
    json summary = json::object();
    int rc = 0;
    for (const auto& check : cfg.raw.at("checks")) {
      std::string suite = check.get<std::string>();
      int r = run_subcommand(suite, cfg);
      summary[suite] = (r == 0);
      rc = std::max(rc, r);
    }
    json body{{"suites", summary}, {"verdict", rc == 0}};
    write_report(cfg, "summary", body);
    return rc;
  }
  throw input_error("unknown subcommand: " + name);
}

}  // namespace khom
