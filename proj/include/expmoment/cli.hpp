#pragma once

// Command-line front end: phi, basis, moments, check, chammam, hankel,
// recover, verify. JSON goes to stdout (or --output), diagnostics to stderr.
// Exit codes: 0 pass, 1 mathematical failure, 2 usage or input-format error.

#include <algorithm>
#include <fstream>
#include <functional>
#include <memory>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "expmoment/expcore.hpp"
#include "expmoment/hankel.hpp"
#include "expmoment/io.hpp"
#include "expmoment/measures.hpp"
#include "expmoment/numerics.hpp"
#include "expmoment/recover.hpp"

namespace expmoment::cli {

using nlohmann::json;

enum ExitCode : int { kPass = 0, kFailure = 1, kUsage = 2 };

/// Outcome of one subcommand: payload for stdout, diagnostics for stderr.
struct CommandResult {
  bool success = true;
  json payload;
  std::vector<std::string> diagnostics;
};

/// Bad flag values or unreadable input files.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct GlobalOptions {
  bool exact = false;
  double tolerance = kPsdTolerance;
  std::string output;
};

namespace detail {

inline std::vector<Rational> parse_list(const std::string& text, const char* flag) {
  std::vector<Rational> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      out.push_back(parse_rational(item));
    } catch (const std::exception& e) {
      throw UsageError(std::string("--") + flag + ": " + e.what());
    }
  }
  if (out.empty()) throw UsageError(std::string("--") + flag + ": empty list");
  return out;
}

inline Rational parse_scalar(const std::string& text, const char* flag) {
  try {
    return parse_rational(text);
  } catch (const std::exception& e) {
    throw UsageError(std::string("--") + flag + ": " + e.what());
  }
}

inline Frequencies frequencies(const std::string& text, bool exact) {
  auto q = parse_list(text, "lambda");
  if (exact) return Frequencies(std::move(q));
  std::vector<double> d;
  for (const auto& v : q) d.push_back(to_double(v));
  return Frequencies(std::move(d));
}

inline json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw UsageError(path + ": " + e.what());
  }
}

inline Domain domain(const std::string& text) {
  if (text == "halfline") return Domain::halfline();
  if (text == "unit-interval" || text == "unit_interval") return Domain::unit_interval();
  const std::string prefix = "interval:";
  if (text.rfind(prefix, 0) == 0) {
    auto ab = parse_list(text.substr(prefix.size()), "domain");
    if (ab.size() != 2) throw UsageError("--domain interval:a,b needs two bounds");
    try {
      return Domain::interval(to_double(ab[0]), to_double(ab[1]));
    } catch (const std::invalid_argument& e) {
      throw UsageError(e.what());
    }
  }
  throw UsageError("--domain must be halfline, unit-interval or interval:a,b");
}

inline Region region(const std::string& text) {
  if (text == "halfline") return Region::halfline;
  if (text == "unit-interval" || text == "unit_interval") return Region::unit_interval;
  throw UsageError("--region must be halfline or unit-interval");
}

inline CommandResult failure(std::string message, json payload = json::object()) {
  payload["status"] = "failure";
  payload["diagnostics"] = json::array({message});
  return {false, std::move(payload), {std::move(message)}};
}

}  // namespace detail

/// Registers the subcommands on `app`; the selected one stores its result in `result`.
class Driver {
 public:
  Driver() : app_("Exponential moments: fundamental function, Hankel certificates, moment recovery") {
    app_.require_subcommand(1);
    app_.fallthrough();
    app_.add_flag("--exact", opt_.exact, "Use exact rational arithmetic where the inputs allow it");
    app_.add_option("--tolerance", opt_.tolerance, "Relative PSD eigenvalue tolerance")->check(CLI::PositiveNumber);
    app_.add_option("--output", opt_.output, "Write the JSON payload to this file instead of stdout");
    add_phi();
    add_basis();
    add_moments();
    add_check();
    add_chammam();
    add_hankel();
    add_recover();
    add_verify();
  }

  int run(std::vector<std::string> args, std::ostream& out, std::ostream& err) {
    std::reverse(args.begin(), args.end());
    try {
      app_.parse(args);
    } catch (const CLI::CallForHelp&) {
      out << app_.help();
      return kPass;
    } catch (const CLI::CallForAllHelp&) {
      out << app_.help("", CLI::AppFormatMode::All);
      return kPass;
    } catch (const CLI::ParseError& e) {
      err << e.what() << "\n";
      return kUsage;
    }

    int code = kPass;
    try {
      result_ = action_();
      code = result_.success ? kPass : kFailure;
    } catch (const UsageError& e) {
      err << "usage: " << e.what() << "\n";
      return kUsage;
    } catch (const io::FormatError& e) {
      err << "input format: " << e.what() << "\n";
      return kUsage;
    } catch (const nlohmann::json::exception& e) {
      err << "input format: " << e.what() << "\n";
      return kUsage;
    } catch (const MomentProblemError& e) {
      result_ = detail::failure(e.what(), {{"stage", e.stage()}});
      code = kFailure;
    } catch (const std::exception& e) {
      result_ = detail::failure(e.what());
      code = kFailure;
    }

    for (const auto& d : result_.diagnostics) err << d << "\n";
    const std::string text = result_.payload.dump() + "\n";
    if (opt_.output.empty()) {
      out << text;
    } else {
      std::ofstream f(opt_.output);
      if (!f) {
        err << "cannot write " << opt_.output << "\n";
        return kUsage;
      }
      f << text;
    }
    return code;
  }

 private:
  void add_phi() {
    auto* sub = app_.add_subcommand("phi", "Fundamental function Phi or its derivative at x");
    auto o = std::make_shared<PhiArgs>();
    sub->add_option("--lambda", o->lambda, "Comma-separated frequencies")->required();
    sub->add_option("--x", o->x, "Evaluation point")->required();
    sub->add_option("--deriv", o->deriv, "Derivative order");
    sub->add_flag("--series", o->series, "Also print the Taylor coefficients a_N..a_{N+60}");
    sub->callback([this, o] {
      action_ = [this, o] {
        auto freq = detail::frequencies(o->lambda, opt_.exact);
        const double x = to_double(detail::parse_scalar(o->x, "x"));
        const unsigned order = o->deriv.value_or(0);
        json p{{"value", eval_phi_deriv(freq, order, x)}};
        if (o->deriv) p["deriv"] = order;
        if (o->series) {
          const unsigned s_max = freq.order() + kDefaultSeriesExtra;
          p["series"] = opt_.exact ? io::series(taylor_coeffs<Rational>(freq, s_max))
                                   : io::series(taylor_coeffs<double>(freq, s_max));
        }
        return CommandResult{true, std::move(p), {}};
      };
    });
  }

  void add_basis() {
    auto* sub = app_.add_subcommand("basis", "Basis values b_j(x) = j! Phi^{(N-j)}(x)");
    auto o = std::make_shared<PhiArgs>();
    sub->add_option("--lambda", o->lambda, "Comma-separated frequencies")->required();
    sub->add_option("--x", o->x, "Evaluation point")->required();
    sub->callback([this, o] {
      action_ = [this, o] {
        auto freq = detail::frequencies(o->lambda, opt_.exact);
        auto x = detail::parse_scalar(o->x, "x");
        json p = opt_.exact ? io::basis(eval_basis_exact(freq, x)) : io::basis(eval_basis(freq, to_double(x)));
        return CommandResult{true, std::move(p), {}};
      };
    });
  }

  void add_moments() {
    auto* sub = app_.add_subcommand("moments", "Exponential moments c_j = int b_j dmu");
    auto o = std::make_shared<MeasureArgs>();
    sub->add_option("--lambda", o->lambda, "Comma-separated frequencies")->required();
    sub->add_option("--measure", o->measure, "Measure JSON file")->required();
    sub->add_option("--domain", o->domain, "halfline | unit-interval | interval:a,b");
    sub->callback([this, o] {
      action_ = [this, o] {
        auto freq = detail::frequencies(o->lambda, opt_.exact);
        auto doc = detail::read_json(o->measure);
        auto dom = detail::domain(o->domain);
        if (opt_.exact)
          return CommandResult{true, io::moments(exp_moments_exact(freq, io::exact_atomic_from(doc), dom)), {}};
        return CommandResult{true, io::moments(exp_moments(freq, io::measure_from(doc), dom)), {}};
      };
    });
  }

  void add_check() {
    auto* sub = app_.add_subcommand("check", "Certify the Hankel forms of (b_j(x)) on the half-line or [0,1]");
    auto o = std::make_shared<CheckArgs>();
    sub->add_option("--lambda", o->lambda, "Comma-separated frequencies")->required();
    sub->add_option("--x", o->x, "Evaluation point")->required();
    sub->add_option("--region", o->region, "halfline | unit-interval");
    sub->callback([this, o] {
      action_ = [this, o] {
        auto freq = detail::frequencies(o->lambda, opt_.exact);
        auto x = detail::parse_scalar(o->x, "x");
        auto region = detail::region(o->region);
        Theorem1Options topt;
        topt.tolerance = opt_.tolerance;
        json p;
        bool pass = false;
        if (opt_.exact) {
          auto rep = theorem1_check_exact(freq, x, region, topt);
          pass = rep.pass;
          p = io::theorem1(rep);
        } else {
          auto rep = theorem1_check(freq, to_double(x), region, topt);
          pass = rep.pass;
          p = io::theorem1(rep);
        }
        CommandResult r{pass, std::move(p), {}};
        if (!pass) r.diagnostics.push_back("check failed: a Hankel form is not positive semidefinite");
        return r;
      };
    });
  }

  void add_chammam() {
    auto* sub = app_.add_subcommand("chammam", "Closed-form det[(alpha)_{i+j}/(1+alpha+beta)_{i+j}]");
    auto o = std::make_shared<ChammamArgs>();
    sub->add_option("--alpha", o->alpha, "alpha (rational)")->required();
    sub->add_option("--beta", o->beta, "beta (rational)")->required();
    sub->add_option("--m", o->m, "Matrix index bound (order m+1)")->required();
    sub->add_flag("--verify", o->verify, "Also compute the determinant by elimination");
    sub->callback([this, o] {
      action_ = [o] {
        auto a = detail::parse_scalar(o->alpha, "alpha");
        auto b = detail::parse_scalar(o->beta, "beta");
        auto v = chammam_det(a, b, o->m);
        json p{{"value", to_string(v)}};
        bool ok = true;
        if (o->verify) {
          auto d = exact_det(chammam_matrix(a, b, o->m));
          ok = d == v;
          p["det"] = to_string(d);
          p["equal"] = ok;
        }
        CommandResult r{ok, std::move(p), {}};
        if (!ok) r.diagnostics.push_back("product formula and determinant disagree");
        return r;
      };
    });
  }

  void add_hankel() {
    auto* sub = app_.add_subcommand("hankel", "Build and certify one Hankel form of a sequence");
    auto o = std::make_shared<HankelArgs>();
    auto* vals = sub->add_option("--values", o->values, "Comma-separated sequence c_0,c_1,...");
    auto* file = sub->add_option("--moments", o->moments, "MomentSequence JSON file");
    vals->excludes(file);
    sub->add_option("--k", o->k, "Form size - 1 (default: largest admissible)");
    sub->add_option("--shift", o->shift, "0 for c_{i+j}, 1 for c_{i+j+1}")->check(CLI::Range(0, 1));
    sub->add_flag("--differenced", o->differenced, "Use c_{i+j} - c_{i+j+1}");
    sub->callback([this, o] {
      action_ = [this, o] {
        std::vector<Rational> seq;
        if (!o->values.empty()) {
          seq = detail::parse_list(o->values, "values");
        } else if (!o->moments.empty()) {
          seq = io::exact_moments_from(detail::read_json(o->moments)).values;
        } else {
          throw UsageError("hankel needs --values or --moments");
        }
        const std::size_t extra = (o->shift == 1 || o->differenced) ? 1 : 0;
        if (seq.size() < 1 + extra) throw UsageError("sequence too short for the requested form");
        const unsigned k = o->k.value_or(static_cast<unsigned>((seq.size() - 1 - extra) / 2));
        HankelSpec<Rational> spec{seq, k, o->shift, o->differenced};
        auto not_psd = [](const PsdReport& r) {
          return r.is_psd ? std::vector<std::string>{} : std::vector<std::string>{"matrix is not positive semidefinite"};
        };
        try {
          spec.validate();
        } catch (const std::exception& e) {
          throw UsageError(e.what());
        }
        if (opt_.exact) {
          auto m = build_hankel(spec);
          auto rep = psd_check(m);
          return CommandResult{rep.is_psd, {{"matrix", io::matrix(m)}, {"psd", io::psd(rep)}}, not_psd(rep)};
        }
        auto m = to_double(build_hankel(spec));
        auto rep = psd_check(m, opt_.tolerance);
        return CommandResult{rep.is_psd, {{"matrix", io::matrix(m)}, {"psd", io::psd(rep)}}, not_psd(rep)};
      };
    });
  }

  void add_recover() {
    auto* sub = app_.add_subcommand("recover", "Atomic measure with the given power moments");
    auto o = std::make_shared<RecoverArgs>();
    sub->add_option("--moments", o->moments, "MomentSequence JSON file")->required();
    sub->add_option("--domain", o->domain, "Override the file's domain: halfline | unit-interval | interval:a,b");
    sub->callback([this, o] {
      action_ = [this, o] {
        auto doc = detail::read_json(o->moments);
        auto c = io::moments_from(doc);
        if (!o->domain.empty()) c.domain = detail::domain(o->domain);
        if (opt_.exact) {
          auto q = io::exact_moments_from(doc);
          q.domain = c.domain;
          auto solv = check_solvable(q);
          if (!solv.solvable) throw MomentProblemError("solvability", solv.diagnostic);
        }
        return CommandResult{true, io::atomic(recover_measure(c, opt_.tolerance)), {}};
      };
    });
  }

  void add_verify() {
    auto* sub = app_.add_subcommand("verify", "Exponential moments of mu and a classical measure reproducing them");
    auto o = std::make_shared<MeasureArgs>();
    sub->add_option("--lambda", o->lambda, "Comma-separated frequencies")->required();
    sub->add_option("--measure", o->measure, "Measure JSON file")->required();
    sub->add_option("--domain", o->domain, "halfline | unit-interval | interval:a,b");
    sub->callback([this, o] {
      action_ = [this, o] {
        auto freq = detail::frequencies(o->lambda, opt_.exact);
        auto mu = io::measure_from(detail::read_json(o->measure));
        auto rep = verify_transfer(freq, mu, detail::domain(o->domain), opt_.tolerance);
        CommandResult r{rep.pass, io::transfer(rep), rep.diagnostics};
        return r;
      };
    });
  }

  struct PhiArgs {
    std::string lambda, x;
    std::optional<unsigned> deriv;
    bool series = false;
  };
  struct MeasureArgs {
    std::string lambda, measure, domain = "halfline";
  };
  struct CheckArgs {
    std::string lambda, x, region = "halfline";
  };
  struct ChammamArgs {
    std::string alpha, beta;
    unsigned m = 0;
    bool verify = false;
  };
  struct HankelArgs {
    std::string values, moments;
    std::optional<unsigned> k;
    unsigned shift = 0;
    bool differenced = false;
  };
  struct RecoverArgs {
    std::string moments, domain;
  };

  CLI::App app_;
  GlobalOptions opt_;
  std::function<CommandResult()> action_;
  CommandResult result_;
};

inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Driver d;
  return d.run(args, out, err);
}

}  // namespace expmoment::cli
