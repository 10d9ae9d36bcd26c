// hpda-lab: build, check, run and compare two-layer caching arrays.
//
// Exit codes: 0 ok, 1 verification/decoding/audit failure, 2 bad parameters
// or malformed input, 3 I/O failure, 4 internal protocol error.

#include <hpda/analysis.hpp>
#include <hpda/sim.hpp>

#include "CLI11.hpp"

#include <fstream>
#include <iostream>
#include <sstream>

using namespace hpda;

namespace {

constexpr const char* kBanner = "hpda-lab format v1";

enum Exit { kOk = 0, kFailed = 1, kBadInput = 2, kIo = 3, kInternal = 4 };

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path);
  std::ostringstream os;
  os << in.rdbuf();
  if (in.bad()) throw IoError("error while reading " + path);
  return os.str();
}

void write_file(const std::string& path, const std::string& body) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path);
  out << body;
  out.flush();
  if (!out) throw IoError("error while writing " + path);
}

// "mn:K,t" or "partition:q,m"
Pda parse_pda_spec(const std::string& spec) {
  auto colon = spec.find(':');
  auto comma = spec.find(',', colon == std::string::npos ? 0 : colon);
  require(colon != std::string::npos && comma != std::string::npos,
          "PDA spec must look like mn:K,t or partition:q,m (got '" + spec + "')");
  std::string kind = spec.substr(0, colon);
  std::size_t a = detail::parse_count(spec.substr(colon + 1, comma - colon - 1));
  std::size_t b = detail::parse_count(spec.substr(comma + 1));
  if (kind == "mn") return mn_pda(a, b);
  if (kind == "partition") return partition_pda(a, b);
  throw PreconditionError("unknown PDA family '" + kind + "'");
}

std::string first_header_token(const std::string& text) {
  std::istringstream is(text);
  std::string line;
  if (!detail::next_nonblank(is, line)) return "";
  return detail::tokens(line).front();
}

Mode parse_mode(const std::string& s) { return s == "sp" ? Mode::SecurePrivate : Mode::Plain; }

Delivery parse_delivery(const std::string& s) {
  return s == "blind" ? Delivery::MirrorBlind : Delivery::MirrorAssisted;
}

std::set<std::size_t> zero_based(const std::vector<std::size_t>& xs) {
  std::set<std::size_t> out;
  for (auto x : xs) {
    require(x >= 1, "indices are 1-based");
    out.insert(x - 1);
  }
  return out;
}

void print_perf(std::ostream& os, const PerfRecord& r) {
  os << "predicted " << r.scheme << ' ' << to_string(r.mode) << ": M1/N=" << to_short_string(r.m1_ratio)
     << " M2/N=" << to_short_string(r.m2_ratio) << " R1=" << to_short_string(r.R1) << " R2=" << to_short_string(r.R2)
     << " F=" << format_F(r.F) << '\n';
}

void print_stats(std::ostream& os, const Hpda& h) {
  const auto& p = h.params;
  auto st = hpda_stats(h);
  os << "params K1=" << p.K1 << " K2=" << p.K2 << " F=" << p.F << " Z1=" << p.Z1 << " Z2=" << p.Z2 << '\n';
  os << "|SM|=" << st.s_m << " |union Sk|=" << st.union_s_k << '\n';
  for (std::size_t k = 0; k < st.s_k.size(); ++k)
    os << "|S" << k + 1 << "|=" << st.s_k[k] << " |SM cap S" << k + 1 << "|=" << st.s_m_cap_s_k[k] << '\n';
}

// ---- construct

struct ConstructOpts {
  std::string method, outer, inner, out;
  std::size_t k1 = 0, k2 = 0, t = 0, n = 0;
};

int cmd_construct(const ConstructOpts& o) {
  Hpda h;
  std::vector<PerfRecord> perf;
  if (o.method == "grouping") {
    h = grouping_hpda({o.k1, o.k2, o.t});
    Rational N(o.n ? o.n : o.k1 * o.k2);
    for (Mode m : {Mode::Plain, Mode::SecurePrivate}) perf.push_back(thm2_perf(o.k1, o.k2, o.t, N, m));
  } else if (o.method == "hybrid") {
    require(!o.outer.empty() && !o.inner.empty(), "hybrid needs --outer and --inner");
    Pda B = parse_pda_spec(o.outer), C = parse_pda_spec(o.inner);
    h = hybrid_hpda(B, C);
    Rational N(o.n ? o.n : B.params().K * C.params().K);
    for (Mode m : {Mode::Plain, Mode::SecurePrivate}) perf.push_back(thm3_perf(B.params(), C.params(), N, m));
  } else {
    throw PreconditionError("unknown method '" + o.method + "'");
  }
  require_valid(h, "construct");
  std::string body = std::string(kBanner) + "\n" + to_text(h);
  std::ostream& info = o.out.empty() ? std::cerr : std::cout;
  if (o.out.empty()) {
    std::cout << body;
  } else {
    write_file(o.out, body);
    std::cout << kBanner << '\n' << "wrote " << o.out << '\n';
  }
  print_stats(info, h);
  for (const auto& r : perf) print_perf(info, r);
  return kOk;
}

// ---- verify

int report(const std::vector<Violation>& vs) {
  if (vs.empty()) {
    std::cout << "ok\n";
    return kOk;
  }
  for (const auto& v : vs) std::cout << "violation " << to_string(v) << '\n';
  std::cout << "FAIL " << vs.size() << " violation(s)\n";
  return kFailed;
}

int cmd_verify(const std::string& path) {
  const std::string text = read_file(path);
  std::cout << kBanner << '\n';
  const std::string head = first_header_token(text);
  if (head == "HPDA") {
    Hpda h = parse_hpda(text);
    auto chk = verify_hpda(h);
    if (chk.ok()) print_stats(std::cout, h);
    return report(chk.violations);
  }
  require(head == "PDA", "file is neither a PDA nor an HPDA");
  // Read the grid without validating it so violations can be listed.
  std::istringstream is(text);
  std::string line;
  detail::next_nonblank(is, line);
  auto toks = detail::tokens(line);
  require(toks.size() == 5, "expected header 'PDA K F Z S'");
  std::size_t F = detail::parse_count(toks[2]);
  std::vector<std::vector<Entry>> rows;
  while (rows.size() < F && detail::next_nonblank(is, line)) {
    std::vector<Entry> row;
    for (const auto& t : detail::tokens(line)) row.push_back(detail::parse_entry(t));
    rows.push_back(std::move(row));
  }
  require(rows.size() == F, "PDA grid has fewer rows than declared");
  auto chk = verify_pda(Grid<Entry>::from_rows(rows));
  if (chk.ok()) {
    const auto& p = *chk.params;
    PdaParams want{detail::parse_count(toks[1]), F, detail::parse_count(toks[3]), detail::parse_count(toks[4])};
    if (!(p == want)) chk.violations.push_back({"header", {}, {}, "header parameters do not match the grid"});
    else std::cout << "params K=" << p.K << " F=" << p.F << " Z=" << p.Z << " S=" << p.S << '\n';
  }
  return report(chk.violations);
}

// ---- simulate

struct SimOpts {
  std::string path, mode = "plain", delivery = "assisted", transcript, demand = "random";
  std::size_t n = 0, b = 0;
  std::uint32_t q = 2;
  std::uint64_t seed = 0;
};

int cmd_simulate(const SimOpts& o) {
  Hpda h = parse_hpda(read_file(o.path));
  require(verify_hpda(h).ok(), o.path + " is not a valid HPDA (run verify)");
  const std::size_t N = o.n ? o.n : h.params.K1 * h.params.K2;
  const std::size_t B = o.b ? o.b : h.params.F;
  SchemeInstance inst = SchemeInstance::make(h, N, B, o.q, parse_mode(o.mode), parse_delivery(o.delivery));
  Rng rng(o.seed);
  Library lib = random_library(inst, rng);
  Randomness rand = draw_randomness(inst, rng);
  DemandMatrix D;
  if (o.demand == "canonical") D = canonical_demand(inst.users(), N);
  else if (o.demand == "random") D = random_full_rank_demand(inst.K1(), inst.K2(), N, inst.field, rng);
  else throw PreconditionError("unknown demand model '" + o.demand + "'");
  Transcript t = run_session(inst, lib, rand, D);
  if (!o.transcript.empty()) write_file(o.transcript, std::string(kBanner) + "\n" + t.to_log());

  auto [r1, r2] = measure_loads(t);
  auto want = expected_performance(h, N, inst.mode, inst.delivery);
  std::cout << kBanner << '\n'
            << "mode=" << to_string(inst.mode) << " delivery=" << to_string(inst.delivery) << " q=" << o.q
            << " N=" << N << " B=" << B << " F=" << t.F << " seed=" << o.seed << '\n'
            << "M1/N=" << to_short_string(t.memory.m1_ratio) << " M2/N=" << to_short_string(t.memory.m2_ratio) << '\n'
            << "layer1_signals=" << t.layer1.size();
  for (std::size_t k = 0; k < t.layer2.size(); ++k) std::cout << " layer2_signals[" << k + 1 << "]=" << t.layer2[k].size();
  std::cout << '\n';
  for (std::size_t k1 = 0; k1 < inst.K1(); ++k1)
    for (std::size_t k2 = 0; k2 < inst.K2(); ++k2)
      std::cout << "user" << user_tag(k1, k2) << ' ' << (t.decoded[inst.user(k1, k2)].ok ? "ok" : "FAIL") << '\n';
  std::cout << "expected R1=" << to_short_string(want.R1) << " R2=" << to_short_string(want.R2) << '\n';
  char digest[32];
  std::snprintf(digest, sizeof digest, "%016llx", static_cast<unsigned long long>(t.digest()));
  std::cout << "digest=" << digest << '\n';
  std::cout << "R1=" << to_short_string(r1) << " R2=" << to_short_string(r2)
            << " decode=" << (t.all_decoded() ? "OK" : "FAIL") << '\n';
  return t.all_decoded() ? kOk : kFailed;
}

// ---- audit

struct AuditOpts {
  std::string path, target = "security1", mode = "sp", delivery = "assisted";
  std::vector<std::size_t> t1, t2;
  std::size_t n = 2, link = 0;
  std::uint32_t q = 2;
  std::uint64_t budget = std::uint64_t{1} << 26;
  unsigned workers = 0;
};

int cmd_audit(const AuditOpts& o) {
  AuditSpec s;
  s.hpda = parse_hpda(read_file(o.path));
  require(verify_hpda(s.hpda).ok(), o.path + " is not a valid HPDA (run verify)");
  s.q = o.q;
  s.N = o.n;
  s.mode = parse_mode(o.mode);
  s.delivery = parse_delivery(o.delivery);
  if (o.target == "security1") s.target = AuditTarget::SecurityI;
  else if (o.target == "security2") s.target = AuditTarget::SecurityII;
  else if (o.target == "privacy1") s.target = AuditTarget::PrivacyI;
  else if (o.target == "privacy2") s.target = AuditTarget::PrivacyII;
  else throw PreconditionError("unknown audit target '" + o.target + "'");
  s.T1 = zero_based(o.t1);
  s.T2 = zero_based(o.t2);
  if (o.link) s.link = o.link - 1;
  s.budget = o.budget;
  s.workers = o.workers;
  AuditReport r = mi_audit(s);
  std::cout << kBanner << '\n' << r.to_text();
  return s.mode == Mode::SecurePrivate && !r.exactly_zero ? kFailed : kOk;
}

// ---- compare

struct CompareOpts {
  std::size_t k1 = 0, k2 = 0, grid = 201;
  std::string n, out, m1, m2;
  std::vector<std::size_t> ts;
};

Rational parse_rational(const std::string& s) {
  try {
    auto slash = s.find('/');
    if (slash != std::string::npos) return Rational(BigInt(s.substr(0, slash)), BigInt(s.substr(slash + 1)));
    auto dot = s.find('.');
    if (dot == std::string::npos) return Rational(BigInt(s));
    std::string frac = s.substr(dot + 1);
    BigInt den = 1;
    for (std::size_t i = 0; i < frac.size(); ++i) den *= 10;
    return Rational(BigInt((s.substr(0, dot).empty() ? "0" : s.substr(0, dot)) + frac), den);
  } catch (const std::exception&) {
    throw PreconditionError("not a number: '" + s + "'");
  }
}

int cmd_compare(const CompareOpts& o) {
  const Rational N = parse_rational(o.n);
  require(o.k1 >= 1 && o.k2 >= 1, "compare needs K1, K2 >= 1");
  std::vector<std::size_t> ts = o.ts;
  if (ts.empty()) {
    std::vector<Rational> targets;
    for (int i = 2; i <= 9; ++i) targets.push_back(Rational(i, 10));
    ts = fig5_points(o.k1, o.k2, targets);
  }
  std::sort(ts.begin(), ts.end());
  ts.erase(std::unique(ts.begin(), ts.end()), ts.end());
  std::string csv = std::string(kBanner) + "\n" + to_csv(sweep_compare(o.k1, o.k2, N, ts), o.k1, o.k2, N);
  if (o.out.empty()) std::cout << csv;
  else write_file(o.out, csv);

  if (!o.m1.empty() || !o.m2.empty()) {
    require(!o.m1.empty() && !o.m2.empty(), "--m1 and --m2 go together");
    SystemParams p{o.k1, o.k2, parse_rational(o.m1), parse_rational(o.m2), N};
    std::ostream& os = o.out.empty() ? std::cerr : std::cout;
    os << "baseline_grid=" << o.grid << 'x' << o.grid << '\n';
    for (Baseline b : {Baseline::KNMD, Baseline::WWCY}) {
      auto best = optimize_baseline(b, p, Objective::R1, o.grid);
      os << to_string(b) << " min_R1=" << format_decimal(best.loads.R1) << " R2=" << format_decimal(best.loads.R2)
         << " alpha=" << to_short_string(best.split.alpha) << " beta=" << to_short_string(best.split.beta) << '\n';
    }
  }
  return kOk;
}

// ---- demo

int cmd_demo(std::uint64_t seed) {
  Hpda h = grouping_hpda({2, 2, 2});
  std::cout << kBanner << '\n' << "# grouping array for K1=2, K2=2, t=2\n" << to_text(h);
  print_stats(std::cout, h);
  // Each user asks for the sum of two files.
  DemandMatrix D;
  for (std::size_t u = 0; u < 4; ++u) {
    FVec d(24);
    d[2 * u] = d[2 * u + 1] = 1;
    D.rows.push_back(d);
  }
  bool all_ok = true;
  struct Run { const char* name; Mode mode; std::uint32_t q; };
  for (Run run : {Run{"plain", Mode::Plain, 2}, Run{"secure-private", Mode::SecurePrivate, 3}}) {
    SchemeInstance inst = SchemeInstance::make(h, 24, 6, run.q, run.mode, Delivery::MirrorAssisted);
    Rng rng(seed);
    Library lib = random_library(inst, rng);
    Randomness rand = draw_randomness(inst, rng);
    Transcript t = run_session(inst, lib, rand, D);
    auto [r1, r2] = measure_loads(t);
    std::cout << "\n# " << run.name << " run, N=24, B=6, q=" << run.q << '\n'
              << "M1/N=" << to_short_string(t.memory.m1_ratio) << " M2/N=" << to_short_string(t.memory.m2_ratio) << '\n'
              << t.to_log();
    for (std::size_t u = 0; u < 4; ++u)
      std::cout << "user" << user_tag(u / 2, u % 2) << " wants W" << 2 * u + 1 << "+W" << 2 * u + 2 << ": "
                << (t.decoded[u].ok ? "decoded" : "FAILED") << '\n';
    std::cout << "R1=" << to_short_string(r1) << " R2=" << to_short_string(r2)
              << " decode=" << (t.all_decoded() ? "OK" : "FAIL") << '\n';
    all_ok = all_ok && t.all_decoded();
  }
  return all_ok ? kOk : kFailed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Two-layer coded caching arrays: construct, verify, simulate, audit, compare"};
  app.require_subcommand(1, 1);

  ConstructOpts co;
  auto* construct = app.add_subcommand("construct", "Build an HPDA and write it in text form");
  construct->add_option("--method", co.method, "grouping or hybrid")->required()
      ->check(CLI::IsMember({"grouping", "hybrid"}));
  construct->add_option("--k1", co.k1, "mirrors (grouping)");
  construct->add_option("--k2", co.k2, "users per mirror (grouping)");
  construct->add_option("--t", co.t, "grouping parameter, K2 <= t <= K1*K2");
  construct->add_option("--outer", co.outer, "outer PDA, mn:K,t or partition:q,m (hybrid)");
  construct->add_option("--inner", co.inner, "inner PDA, mn:K,t or partition:q,m (hybrid)");
  construct->add_option("--n", co.n, "file count for the predicted loads (default K1*K2)");
  construct->add_option("--out", co.out, "output path (default stdout)");

  std::string verify_path;
  auto* verify = app.add_subcommand("verify", "Check a PDA or HPDA file");
  verify->add_option("path", verify_path)->required();

  SimOpts so;
  auto* simulate = app.add_subcommand("simulate", "Run one delivery session over an HPDA file");
  simulate->add_option("path", so.path)->required();
  simulate->add_option("--n", so.n, "number of files (default K1*K2)");
  simulate->add_option("--q", so.q, "field size (prime)");
  simulate->add_option("--b", so.b, "file length in symbols, a multiple of F (default F)");
  simulate->add_option("--mode", so.mode)->check(CLI::IsMember({"plain", "sp"}));
  simulate->add_option("--delivery", so.delivery)->check(CLI::IsMember({"assisted", "blind"}));
  simulate->add_option("--demand", so.demand, "random (full rank) or canonical")
      ->check(CLI::IsMember({"random", "canonical"}));
  simulate->add_option("--seed", so.seed)->required();
  simulate->add_option("--transcript", so.transcript, "write the signal log here");

  AuditOpts ao;
  auto* audit = app.add_subcommand("audit", "Exact mutual-information audit of a tiny HPDA");
  audit->add_option("path", ao.path)->required();
  audit->add_option("--target", ao.target)
      ->check(CLI::IsMember({"security1", "security2", "privacy1", "privacy2"}));
  audit->add_option("--mode", ao.mode)->check(CLI::IsMember({"plain", "sp"}));
  audit->add_option("--delivery", ao.delivery)->check(CLI::IsMember({"assisted", "blind"}));
  audit->add_option("--q", ao.q);
  audit->add_option("--n", ao.n);
  audit->add_option("--t1", ao.t1, "colluding mirrors (1-based)")->delimiter(',');
  audit->add_option("--t2", ao.t2, "colluding user positions (1-based)")->delimiter(',');
  audit->add_option("--link", ao.link, "security2: observe one mirror link only (1-based)");
  audit->add_option("--budget", ao.budget, "maximum enumerated states");
  audit->add_option("--workers", ao.workers, "worker threads (0 = hardware)");

  CompareOpts cmp;
  auto* compare = app.add_subcommand("compare", "Tabulate schemes at matched memory ratios (CSV)");
  compare->add_option("--k1", cmp.k1)->required();
  compare->add_option("--k2", cmp.k2)->required();
  compare->add_option("--n", cmp.n)->required();
  compare->add_option("--t", cmp.ts, "grouping parameters (default: M1/N targets 0.2..0.9)")->delimiter(',');
  compare->add_option("--m1", cmp.m1, "mirror memory for the baseline optimum");
  compare->add_option("--m2", cmp.m2, "user memory for the baseline optimum");
  compare->add_option("--grid", cmp.grid, "baseline (alpha, beta) grid points per axis");
  compare->add_option("--out", cmp.out, "CSV path (default stdout)");

  std::uint64_t demo_seed = 1;
  auto* demo = app.add_subcommand("demo", "Walk through the 2x2 grouping example, plain then secure-private");
  demo->add_option("--seed", demo_seed, "randomness for files and keys (fixed default)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kBadInput;
  }

  try {
    if (*construct) return cmd_construct(co);
    if (*verify) return cmd_verify(verify_path);
    if (*simulate) return cmd_simulate(so);
    if (*audit) return cmd_audit(ao);
    if (*compare) return cmd_compare(cmp);
    if (*demo) return cmd_demo(demo_seed);
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kIo;
  } catch (const PreconditionError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kBadInput;
  } catch (const ProtocolError& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return kInternal;
  }
  return kBadInput;
}
