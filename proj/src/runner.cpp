#include "efilt/runner.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <numbers>
#include <ostream>
#include <random>
#include <sstream>

#include <json.hpp>

#include "efilt/classical.hpp"
#include "efilt/codec.hpp"
#include "efilt/errors.hpp"
#include "efilt/purification.hpp"
#include "efilt/reproduce.hpp"

namespace efilt {

namespace {

using Params = std::map<std::string, std::string>;

struct Context {
  std::uint64_t seed = 1;
  std::size_t trials = 0;
  std::size_t workers = 1;
  std::string hash;
};

Cell num(double v) { return v; }
Cell num(std::size_t v) { return static_cast<long long>(v); }
Cell opt(const std::optional<double>& v) { return v ? Cell{*v} : Cell{}; }

PhaseDistribution distribution(const Params& p) {
  return get_text(p, "distribution") == "wrapped-gaussian" ? PhaseDistribution::wrapped_gaussian
                                                           : PhaseDistribution::point_mass_mixture;
}

Codec single_or_multiplexed(const Codec& single, std::size_t sources) {
  return sources == 1 ? single : multiplexed(single, sources);
}

Codec build_codec(const Params& p, std::size_t transmission, std::size_t sources) {
  const std::string kind = get_text(p, "codec");
  if (kind == "fourier") return single_or_multiplexed(fourier_codec(transmission), sources);
  if (kind == "hadamard") return single_or_multiplexed(hadamard_codec(transmission), sources);
  if (kind == "collective") return collective_fourier_codec(sources, transmission);
  Codec c = load_codec_file(get_text(p, "codec_file"));
  if (c.transmission_count() != transmission || c.source_count() != sources) {
    throw ConfigError("codec file is " + std::to_string(c.source_count()) + " -> " +
                      std::to_string(c.transmission_count()) + ", config asks for sources=" +
                      std::to_string(sources) + " T=" + std::to_string(transmission));
  }
  return c;
}

CVector source_input(std::size_t sources, double phi, std::size_t internal) {
  CVector v = CVector::Zero(static_cast<Eigen::Index>(sources * internal));
  const double norm = 1.0 / std::sqrt(static_cast<double>(sources));
  for (std::size_t l = 0; l < sources; ++l) {
    v(static_cast<Eigen::Index>(l * internal)) = std::polar(norm, phi * static_cast<double>(l));
  }
  return v;
}

ResultTable run_filter(const Params& p, const Context& ctx) {
  const std::size_t t = get_size(p, "T");
  const std::size_t s = get_size(p, "sources");
  const std::size_t q = get_size(p, "Q");
  // Fail on the joint system x register size before building large codecs.
  const std::size_t t_est = get_text(p, "codec") == "collective" ? t : t * s;
  checked_product({t_est, t_est + 1});
  const Codec codec = build_codec(p, t, s);
  const std::size_t t_tot = codec.transmission_count();
  const bool internal = get_text(p, "noise") == "internal";

  std::optional<LengthModel> length;
  double alpha = 0.0;
  ChannelNoiseModel noise = PhaseNoiseSpec::uniform(t_tot, 1.0);
  if (internal) {
    noise = InternalNoiseSpec::pauli(get_real(p, "alpha2"));
    alpha = std::sqrt(get_real(p, "alpha2"));
  } else if (has(p, "alphas")) {
    std::vector<cplx> a;
    for (const double v : get_real_list(p, "alphas")) a.emplace_back(v, 0.0);
    if (a.size() != t_tot) {
      throw ConfigError("alphas has " + std::to_string(a.size()) + " entries, codec transmits on " +
                        std::to_string(t_tot) + " channels");
    }
    const PhaseNoiseSpec spec = PhaseNoiseSpec::from_alphas(a);
    alpha = std::abs(spec.mean_alpha());
    noise = spec;
  } else if (has(p, "alpha2")) {
    noise = PhaseNoiseSpec::uniform(t_tot, get_real(p, "alpha2"));
    alpha = std::sqrt(get_real(p, "alpha2"));
  } else {
    length = LengthModel{get_real(p, "gamma"), get_real(p, "length")};
    alpha = alpha_from_length(*length);
  }
  std::optional<double> module;
  if (has(p, "module_alpha2")) module = get_real(p, "module_alpha2");

  const FiltrationConfig cfg{codec,
                             noise,
                             q,
                             length,
                             source_input(s, get_real(p, "phi"), internal ? 2 : 1),
                             module,
                             get_bool(p, "force"),
                             kDefaultDimCap};
  const FiltrationOutcome r = run_exact(cfg);

  std::vector<Cell> row{ctx.hash,
                        num(t),
                        num(q),
                        num(alpha),
                        num(r.p_success),
                        num(r.p_error_given_success()),
                        num(r.conditional_fidelity),
                        opt(r.visibility),
                        num(r.p_success_no_error),
                        num(r.p_success_error)};
  if (ctx.trials > 0 && !internal) {
    const MonteCarloOutcome mc = run_monte_carlo(cfg, ctx.trials, ctx.seed, ctx.workers, distribution(p));
    row.insert(row.end(), {num(mc.p_success), num(mc.p_success_stderr), num(mc.conditional_fidelity),
                           num(mc.fidelity_stderr), opt(mc.visibility),
                           mc.visibility ? num(mc.visibility_stderr) : Cell{}});
  } else {
    row.insert(row.end(), 6, Cell{});
  }
  return {{"config_hash", "T", "Q", "alpha", "p_success", "p_err_given_success", "fidelity", "visibility",
           "p_success_no_error", "p_success_error", "mc_p_success", "mc_p_success_stderr", "mc_fidelity",
           "mc_fidelity_stderr", "mc_visibility", "mc_visibility_stderr"},
          {row}};
}

ResultTable run_series(const Params& p, const Context& ctx) {
  const std::size_t t = get_size(p, "T");
  const std::size_t q = get_size(p, "Q");
  const double gamma = get_real(p, "gamma");
  const double len = get_real(p, "length");
  const LengthModel model{gamma, len};
  const double alpha = alpha_from_length(model);

  Cell exact_err, exact_ps;
  try {
    checked_product(std::vector<std::size_t>(q, t + 1));
    const FiltrationConfig cfg{fourier_codec(t), PhaseNoiseSpec::uniform(t, 1.0), q, model,
                               CVector::Ones(1),  std::nullopt,                    false, kDefaultDimCap};
    const FiltrationOutcome r = run_exact(cfg);
    exact_err = r.p_success_error;
    exact_ps = r.p_success;
  } catch (const DimensionError&) {
    // Too many segments for the joint state; analytic columns only.
  }
  Cell two_segment;
  try {
    two_segment = series_two_segment_analytic(alpha, t);
  } catch (const NumericalCheckError&) {
    // Noiseless or fully dephased line: no improvement to report.
  }
  return {{"config_hash", "T", "Q", "gamma", "length", "alpha", "error_analytic", "error_exact", "p_success_exact",
           "two_segment", "limit"},
          {{ctx.hash, num(t), num(q), num(gamma), num(len), num(alpha), num(series_error_analytic(gamma, len, q, t)),
            exact_err, exact_ps, two_segment, num(series_limit_analytic(alpha, t))}}};
}

ResultTable run_purify(const Params& p, const Context&) {
  PurifyConfig cfg;
  cfg.n = get_size(p, "n");
  cfg.m = get_size(p, "m");
  cfg.p = get_real(p, "p");
  cfg.decoder = get_text(p, "decoder") == "hadamard" ? DecoderKind::hadamard_pair : DecoderKind::fourier_pair;
  cfg.block_offset = get_size(p, "offset") - 1;
  const PurificationOutcome o = purify(cfg);
  return {{"n", "m", "p", "decoder_kind", "F_m", "F_prime", "p_success", "p_total"},
          {{num(cfg.n), num(cfg.m), num(cfg.p), to_string(cfg.decoder), num(o.fidelity_unfiltered), num(o.fidelity),
            num(o.p_success), num(o.p_success_total)}}};
}

ResultTable run_protocol1(const Params& p, const Context& ctx) {
  const std::size_t s = get_size(p, "S");
  const std::size_t r = get_size(p, "R");
  const double prob = get_real(p, "p");
  const std::string kind = get_text(p, "decoder");
  if (r > s) throw ConfigError("need R <= S");
  CMatrix u;
  if (kind == "fourier") {
    PurifyConfig pc;
    pc.n = s;
    pc.m = r;
    u = decoder_a(pc);
  } else if (kind == "hadamard") {
    u = hadamard_codec(s).decoder().matrix();
  } else {
    std::mt19937_64 rng(ctx.seed);
    u = haar_unitary(s, rng);
  }
  const Protocol1Result res = protocol1_construct(s, r, prob, u);
  return {{"S", "R", "p", "decoder_kind", "fidelity_closed", "fidelity_constructed", "fidelity_from_y", "Y",
           "Y_bound", "balanced", "p_success"},
          {{num(s), num(r), num(prob), kind, num(protocol1_fidelity(s, r, prob)), num(res.fidelity),
            num(res.fidelity_from_y), num(res.y), num(res.y_bound), res.balanced, num(res.p_success)}}};
}

ResultTable run_protocol2(const Params& p, const Context&) {
  const std::size_t s = get_size(p, "S");
  const std::size_t t = get_size(p, "T");
  const double a2 = get_real(p, "alpha2");
  std::vector<cplx> amps;
  if (has(p, "amplitudes")) {
    for (const double v : get_real_list(p, "amplitudes")) amps.emplace_back(v, 0.0);
    if (amps.size() != s) throw ConfigError("amplitudes must have S entries");
    double n2 = 0.0;
    for (const cplx a : amps) n2 += std::norm(a);
    if (!(n2 > 0.0)) throw ConfigError("amplitudes must not all be zero");
    for (auto& a : amps) a /= std::sqrt(n2);
  } else {
    amps.assign(s, cplx(1.0 / std::sqrt(static_cast<double>(s)), 0.0));
  }
  double quartic = 0.0;
  for (const cplx a : amps) quartic += std::norm(a) * std::norm(a);
  return {{"S", "T", "alpha2", "sum_a4", "fidelity_closed", "fidelity_constructed"},
          {{num(s), num(t), num(a2), num(quartic), num(protocol2_fidelity(amps, a2, t)),
            num(protocol2_construct(amps, a2, t))}}};
}

NoiseFunction noise_function(const Params& p) {
  NoiseFunction nf;
  const std::string kind = get_text(p, "kind");
  if (kind == "deterministic") {
    nf.kind = ClassicalNoiseKind::deterministic;
  } else if (kind == "linear-phase") {
    nf.kind = ClassicalNoiseKind::linear_phase;
  } else if (kind == "linear-amplitude") {
    nf.kind = ClassicalNoiseKind::linear_amplitude;
  } else {
    nf.kind = ClassicalNoiseKind::nonlinear_phase;
  }
  nf.phase = {get_real(p, "alpha"), distribution(p)};
  nf.log_mu = get_real(p, "log_mu");
  nf.log_sigma = get_real(p, "log_sigma");
  nf.nl_mean = get_real(p, "nl_mean");
  nf.nl_sigma = get_real(p, "nl_sigma");
  return nf;
}

std::string noise_params_text(const Params& p) {
  const std::string kind = get_text(p, "kind");
  if (kind == "deterministic") return "";
  if (kind == "linear-phase") return "alpha=" + p.at("alpha") + ";distribution=" + p.at("distribution");
  if (kind == "linear-amplitude") return "log_mu=" + p.at("log_mu") + ";log_sigma=" + p.at("log_sigma");
  return "alpha=" + p.at("alpha") + ";distribution=" + p.at("distribution") + ";nl_mean=" + p.at("nl_mean") +
         ";nl_sigma=" + p.at("nl_sigma");
}

ResultTable run_classical(const Params& p, const Context& ctx) {
  const std::size_t t = get_size(p, "T");
  const cplx a{get_real(p, "A"), 0.0};
  const NoiseFunction nf = noise_function(p);
  const bool sampled = ctx.trials > 0;
  const ClassicalOutcome o =
      sampled ? classical_run(a, t, nf, ctx.trials, ctx.seed, ctx.workers) : classical_analytic(a, t, nf);
  auto err = [&](double v) { return sampled ? Cell{v} : Cell{}; };
  return {{"T", "noise_kind", "params", "mean_amp_re", "mean_amp_im", "intensity", "fluctuation", "visibility",
           "mean_amp_stderr", "intensity_stderr", "fluctuation_stderr", "visibility_stderr"},
          {{num(t), to_string(nf.kind), noise_params_text(p), num(o.mean_amplitude.real()),
            num(o.mean_amplitude.imag()), num(o.mean_intensity), num(o.fluctuation), num(o.visibility),
            err(o.mean_amplitude_stderr), err(o.intensity_stderr), err(o.fluctuation_stderr),
            err(o.visibility_stderr)}}};
}

ResultTable run_coherent(const Params& p, const Context& ctx) {
  CoherentConfig cfg;
  cfg.transmission = get_size(p, "T");
  const double a2 = get_real(p, "alpha2");
  cfg.alpha = {std::sqrt(a2), 0.0};
  cfg.lambda = {get_real(p, "lambda"), 0.0};
  cfg.phi = get_real(p, "phi");
  Cell mc, mc_err;
  if (ctx.trials > 0) {
    const Estimate e = coherent_current_monte_carlo(cfg, ctx.trials, ctx.seed, ctx.workers, distribution(p));
    mc = e.value;
    mc_err = e.std_error;
  }
  return {{"T", "alpha2", "lambda", "phi", "current", "current_mc", "current_mc_stderr", "visibility"},
          {{num(cfg.transmission), num(a2), num(cfg.lambda.real()), num(cfg.phi), num(coherent_current(cfg)), mc,
            mc_err, num(coherent_visibility(cfg.transmission, a2))}}};
}

ResultTable run_compare(const Params& p, const Context&) {
  const std::size_t t = get_size(p, "T");
  const double a2 = get_real(p, "alpha2");
  const std::size_t q = get_size(p, "Q");
  const CodecComparison c = compare_codecs(t, a2, q);
  ResultTable table{{"codec", "T", "alpha2", "Q", "p_success", "p_success_error", "fidelity", "visibility",
                     "reduction_factor", "optimal", "max_deviation"},
                    {}};
  auto add = [&](const char* name, const FiltrationOutcome& o, const CodecReport& r) {
    table.rows.push_back({std::string(name), num(t), num(a2), num(q), num(o.p_success), num(o.p_success_error),
                          num(o.conditional_fidelity), opt(o.visibility), num(r.reduction_factor), r.optimal,
                          num(c.max_deviation)});
  };
  add("fourier", c.fourier, c.fourier_report);
  add("hadamard", c.hadamard, c.hadamard_report);
  return table;
}

ResultTable run_thresholds(const Params& p, const Context&) {
  const double f = get_real(p, "fidelity");
  const ThresholdReport r = threshold_report(f);
  return {{"fidelity", "bb84_secure", "werner_entangled", "at_boundary"},
          {{num(f), r.bb84_secure, r.werner_entangled, r.at_boundary}}};
}

ResultTable run_reproduce(const Params& p, const Context&) {
  ResultTable table{{"criterion", "name", "passed", "detail"}, {}};
  for (const auto& c : reproduce(get_text(p, "subset"))) {
    table.rows.push_back({static_cast<long long>(c.id), c.name, c.passed, c.detail});
  }
  return table;
}

ResultTable run_target(const std::string& command, const Params& p, const Context& ctx) {
  static const std::map<std::string, std::function<ResultTable(const Params&, const Context&)>> table{
      {"filter", run_filter},     {"series", run_series},       {"purify", run_purify},
      {"protocol1", run_protocol1}, {"protocol2", run_protocol2}, {"classical", run_classical},
      {"coherent", run_coherent}, {"compare-codecs", run_compare}, {"thresholds", run_thresholds},
      {"reproduce", run_reproduce}};
  const auto it = table.find(command);
  if (it == table.end()) throw ConfigError("unknown command '" + command + "'");
  return it->second(p, ctx);
}

std::string csv_real(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string csv_cell(const Cell& c) {
  return std::visit(
      [](const auto& v) -> std::string {
        using V = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<V, std::monostate>) {
          return "";
        } else if constexpr (std::is_same_v<V, std::string>) {
          if (v.find_first_of(",\"\n") == std::string::npos) return v;
          std::string q = "\"";
          for (const char ch : v) q += (ch == '"') ? std::string("\"\"") : std::string(1, ch);
          return q + "\"";
        } else if constexpr (std::is_same_v<V, double>) {
          return csv_real(v);
        } else if constexpr (std::is_same_v<V, long long>) {
          return std::to_string(v);
        } else {
          return v ? "true" : "false";
        }
      },
      c);
}

nlohmann::ordered_json json_cell(const Cell& c) {
  return std::visit(
      [](const auto& v) -> nlohmann::ordered_json {
        using V = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<V, std::monostate>) {
          return nullptr;
        } else {
          return v;
        }
      },
      c);
}

}  // namespace

CodecComparison compare_codecs(std::size_t transmission, double alpha2, std::size_t segments) {
  const std::size_t sources = 2;
  auto run_one = [&](const Codec& single) {
    const FiltrationConfig cfg{multiplexed(single, sources),
                               PhaseNoiseSpec::uniform(sources * transmission, alpha2),
                               segments,
                               std::nullopt,
                               source_input(sources, 0.0, 1),
                               std::nullopt,
                               false,
                               kDefaultDimCap};
    return run_exact(cfg);
  };
  CodecComparison c;
  const Codec f = fourier_codec(transmission);
  const Codec h = hadamard_codec(transmission);
  c.fourier = run_one(f);
  c.hadamard = run_one(h);
  c.fourier_report = validate_codec(f);
  c.hadamard_report = validate_codec(h);
  const double diffs[] = {
      std::abs(c.fourier.p_success - c.hadamard.p_success),
      std::abs(c.fourier.p_success_no_error - c.hadamard.p_success_no_error),
      std::abs(c.fourier.p_success_error - c.hadamard.p_success_error),
      std::abs(c.fourier.conditional_fidelity - c.hadamard.conditional_fidelity),
      std::abs(c.fourier.visibility.value_or(0.0) - c.hadamard.visibility.value_or(0.0)),
      std::abs(c.fourier_report.reduction_factor - c.hadamard_report.reduction_factor)};
  for (const double d : diffs) c.max_deviation = std::max(c.max_deviation, d);
  if (c.max_deviation > 1e-12) {
    throw NumericalCheckError("Fourier and Hadamard codecs disagree by " + csv_real(c.max_deviation));
  }
  return c;
}

ResultTable run(const RunConfig& cfg) {
  const Context ctx{cfg.seed, cfg.trials, cfg.workers, config_hash(cfg)};
  if (cfg.command != "sweep") return run_target(cfg.command, cfg.params, ctx);

  const std::string target = cfg.params.at("target");
  Params fixed = cfg.params;
  fixed.erase("target");
  ResultTable out;
  std::vector<std::size_t> idx(cfg.sweep.size(), 0);
  while (true) {
    Params point = fixed;
    std::vector<Cell> prefix;
    for (std::size_t a = 0; a < cfg.sweep.size(); ++a) {
      point[cfg.sweep[a].name] = cfg.sweep[a].values[idx[a]];
      prefix.emplace_back(cfg.sweep[a].values[idx[a]]);
    }
    const ResultTable part = run_target(target, normalize_params(target, point), ctx);
    if (out.columns.empty()) {
      for (const auto& axis : cfg.sweep) out.columns.push_back("sweep_" + axis.name);
      out.columns.insert(out.columns.end(), part.columns.begin(), part.columns.end());
    }
    for (const auto& row : part.rows) {
      std::vector<Cell> full = prefix;
      full.insert(full.end(), row.begin(), row.end());
      out.rows.push_back(std::move(full));
    }
    // Advance the odometer; the last axis varies fastest.
    std::size_t a = cfg.sweep.size();
    while (a > 0) {
      --a;
      if (++idx[a] < cfg.sweep[a].values.size()) break;
      idx[a] = 0;
      if (a == 0) return out;
    }
  }
}

std::string render(const RunConfig& cfg, const ResultTable& table) {
  const std::string hash = config_hash(cfg);
  if (cfg.format == OutputFormat::json) {
    nlohmann::ordered_json j;
    j["version"] = kVersion;
    j["command"] = cfg.command;
    j["config_hash"] = hash;
    j["seed"] = cfg.seed;
    j["workers"] = cfg.workers;
    j["trials"] = cfg.trials;
    j["columns"] = table.columns;
    auto rows = nlohmann::ordered_json::array();
    for (const auto& row : table.rows) {
      nlohmann::ordered_json r;
      for (std::size_t i = 0; i < row.size(); ++i) r[table.columns[i]] = json_cell(row[i]);
      rows.push_back(std::move(r));
    }
    j["rows"] = std::move(rows);
    return j.dump(2) + "\n";
  }
  std::ostringstream os;
  os << "# efilt " << kVersion << "\n";
  os << "# command=" << cfg.command << " config_hash=" << hash << " seed=" << cfg.seed
     << " workers=" << cfg.workers << " trials=" << cfg.trials << "\n";
  for (std::size_t i = 0; i < table.columns.size(); ++i) os << (i ? "," : "") << table.columns[i];
  os << "\n";
  for (const auto& row : table.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << csv_cell(row[i]);
    os << "\n";
  }
  return os.str();
}

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const ConfigError*>(&e)) return 2;
  if (dynamic_cast<const DimensionError*>(&e)) return 3;
  if (dynamic_cast<const NumericalCheckError*>(&e)) return 4;
  return 1;
}

int execute(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  try {
    const ResultTable table = run(cfg);
    const std::string text = render(cfg, table);
    if (cfg.output.empty()) {
      out << text;
    } else {
      std::ofstream f(cfg.output, std::ios::binary | std::ios::trunc);
      if (!f) throw ConfigError("cannot write output file '" + cfg.output + "'");
      f << text;
    }
    if (cfg.command == "reproduce") {
      for (const auto& row : table.rows) {
        if (!std::get<bool>(row[2])) {
          err << "reproduce: criterion " << std::get<long long>(row[0]) << " failed\n";
          return 4;
        }
      }
    }
    return 0;
  } catch (const std::exception& e) {
    const int code = exit_code_for(e);
    const char* label = code == 2 ? "config error" : code == 3 ? "dimension error" : code == 4 ? "numerical check failed" : "error";
    err << "efilt: " << label << ": " << e.what() << "\n";
    return code;
  }
}

}  // namespace efilt
