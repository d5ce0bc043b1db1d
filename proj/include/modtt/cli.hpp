#pragma once

// The `modtt` command line. Kept in a header so tests can drive it
// in-process with string streams.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "CLI11.hpp"
#include "json.hpp"
#include "modtt/elaborate.hpp"
#include "modtt/paramtest.hpp"
#include "modtt/phase.hpp"
#include "modtt/runtime.hpp"

namespace modtt::cli {

inline constexpr const char* kVersion = "0.1.0";

enum Exit : int { kOk = 0, kTypeError = 1, kThrew = 2, kFuel = 3, kUsage = 4 };

struct Streams {
  std::ostream& out;
  std::ostream& err;
  bool err_is_tty = false;
};

inline bool use_color(const Streams& io) {
  const char* env = std::getenv("MODTT_COLOR");
  std::string mode = env ? env : "auto";
  if (mode == "always") return true;
  if (mode == "never") return false;
  return io.err_is_tty;
}

inline nlohmann::json error_json(const TypeError& e) {
  nlohmann::json j{{"kind", std::string(kind_name(e.kind))}, {"message", e.message}};
  if (e.span.valid()) j["span"] = {{"line", e.span.line}, {"col", e.span.col}, {"end_line", e.span.end_line},
                                   {"end_col", e.span.end_col}};
  if (!e.expected.empty()) j["expected"] = e.expected;
  if (!e.actual.empty()) j["actual"] = e.actual;
  return j;
}

inline int report(const Streams& io, const std::string& file, const TypeError& e, bool json) {
  if (json) {
    io.out << nlohmann::json{{"ok", false}, {"file", file}, {"error", error_json(e)}}.dump(2) << "\n";
    return kTypeError;
  }
  std::string tag = use_color(io) ? "\033[31merror\033[0m" : "error";
  io.err << file << ":" << e.span.str() << ": " << tag << " [" << kind_name(e.kind) << "] " << e.message << "\n";
  if (!e.expected.empty()) io.err << "  expected: " << e.expected << "\n";
  if (!e.actual.empty()) io.err << "  actual:   " << e.actual << "\n";
  return kTypeError;
}

inline std::optional<std::string> read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return std::nullopt;
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline nlohmann::json outcome_json(const RunResult& r) {
  if (auto* v = std::get_if<Returned>(&r)) return {{"outcome", "returned"}, {"value", to_string(v->value)}};
  if (std::holds_alternative<Threw>(r)) return {{"outcome", "threw"}};
  return {{"outcome", "fuel-exhausted"}};
}

inline nlohmann::json campaign_json(const CampaignReport& r, const std::string& file, const std::string& a,
                                    const std::string& b, const std::string& sig, std::size_t max_len,
                                    std::uint64_t seed) {
  nlohmann::json j{{"file", file},          {"impls", {a, b}},          {"sig", sig},
                   {"clients", r.clients},  {"max_len", max_len},       {"seed", seed},
                   {"agree", r.agree},      {"disagree", r.disagree},   {"inconclusive", r.inconclusive},
                   {"counterexample", nullptr}};
  if (r.first) {
    j["counterexample"] = {{"seed", r.first->seed},
                           {"script", r.first->script.str()},
                           {"shrunk", r.first->shrunk.str()},
                           {"left", outcome_json(r.first->left)},
                           {"right", outcome_json(r.first->right)}};
  }
  return j;
}

inline int run(int argc, const char* const* argv, const Streams& io) {
  CLI::App app{"modtt: a module type theory with phases, extents and generative functors"};
  app.require_subcommand(1);
  bool json = false;
  app.add_flag("--json", json, "machine-readable output");

  std::string file, item = "main", sig_name;
  bool emit_core = false;
  std::uint64_t fuel = kDefaultFuel, seed = 42;
  std::size_t clients = 1000, max_len = 20;
  std::vector<std::string> impls;

  auto* check = app.add_subcommand("check", "typecheck a file");
  check->add_option("file", file)->required();
  check->add_flag("--json", json);

  auto* elab = app.add_subcommand("elaborate", "elaborate a file to the core");
  elab->add_option("file", file)->required();
  elab->add_flag("--emit-core", emit_core, "print the elaborated core");
  elab->add_flag("--json", json);

  auto* eval = app.add_subcommand("eval", "run a computation item (default: main)");
  eval->add_option("file", file)->required();
  eval->add_option("--item", item, "item to run");
  eval->add_option("--fuel", fuel, "evaluation step budget");
  eval->add_flag("--json", json);

  auto* stat = app.add_subcommand("static", "show the static part of an item");
  stat->add_option("file", file)->required();
  stat->add_option("item", item)->required();
  stat->add_flag("--json", json);

  auto* pt = app.add_subcommand("param-test", "compare two implementations on generated clients");
  pt->add_option("file", file)->required();
  pt->add_option("--impl", impls, "implementation (twice)")->required()->expected(2);
  pt->add_option("--sig", sig_name, "shared signature")->required();
  pt->add_option("--clients", clients, "number of clients");
  pt->add_option("--max-len", max_len, "maximum script length")->check(CLI::PositiveNumber);
  pt->add_option("--seed", seed, "seed of the first client");
  pt->add_option("--fuel", fuel, "evaluation step budget per run");
  pt->add_flag("--json", json);

  app.add_subcommand("version", "print the version");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    io.out << app.help();
    return kOk;
  } catch (const CLI::ParseError& e) {
    io.err << e.what() << "\n";
    return kUsage;
  }

  auto* sub = app.get_subcommands().front();
  if (sub->get_name() == "version") {
    io.out << "modtt " << kVersion << "\n";
    return kOk;
  }

  auto source = read_file(file);
  if (!source) {
    io.err << "cannot read " << file << "\n";
    return kUsage;
  }

  try {
    auto program = elaborate_file(*source);
    const auto& name = sub->get_name();

    if (name == "check") {
      if (json) io.out << nlohmann::json{{"ok", true}, {"file", file}, {"items", program.items.size()}}.dump(2) << "\n";
      else io.out << file << ": ok (" << program.items.size() << " items)\n";
      return kOk;
    }

    if (name == "elaborate") {
      if (json) {
        nlohmann::json items = nlohmann::json::array();
        for (auto& it : program.items) {
          nlohmann::json j{{"name", it.name}, {"kind", it.kind}, {"sig", to_string(it.sig)}};
          if (it.bound()) j["bind"] = to_string(it.scrutinee);
          else j["def"] = to_string(it.def);
          items.push_back(j);
        }
        io.out << nlohmann::json{{"ok", true}, {"file", file}, {"items", items}}.dump(2) << "\n";
      } else if (emit_core) {
        io.out << program.emit_core();
      } else {
        for (auto& it : program.items) io.out << it.kind << " " << it.name << " : " << to_string(it.sig) << "\n";
      }
      return kOk;
    }

    if (name == "eval") {
      auto r = run_cmp(program.closed_run(item), fuel);
      if (json) io.out << outcome_json(r).dump(2) << "\n";
      else if (auto* v = std::get_if<Returned>(&r)) io.out << to_string(v->value) << "\n";
      else if (std::holds_alternative<Threw>(r)) io.err << "uncaught throw\n";
      else io.err << "fuel exhausted after " << fuel << " steps\n";
      if (std::holds_alternative<Threw>(r)) return kThrew;
      if (std::holds_alternative<FuelExhausted>(r)) return kFuel;
      return kOk;
    }

    if (name == "static") {
      auto* it = program.find(item);
      if (!it) fail(ErrorKind::Unbound, "no top-level item named '" + item + "'");
      auto ctx = program.context(it->level);
      auto skel = static_part_sig(ctx, it->sig);
      std::string value = it->bound() ? "" : to_string(static_part_val(ctx, it->def, it->sig));
      if (json) {
        nlohmann::json j{{"item", item}, {"skeleton", to_string(skel)}};
        j["static"] = it->bound() ? nlohmann::json(nullptr) : nlohmann::json(value);
        io.out << j.dump(2) << "\n";
      } else {
        io.out << "skeleton: " << to_string(skel) << "\n";
        io.out << "static:   " << (it->bound() ? "(determined at run time)" : value) << "\n";
      }
      return kOk;
    }

    // param-test
    auto shape = queue_shape(program, sig_name);
    auto a = implementation(program, impls[0], shape);
    auto b = implementation(program, impls[1], shape);
    auto r = campaign(a, b, shape, clients, max_len, seed, fuel);
    if (json) {
      io.out << campaign_json(r, file, impls[0], impls[1], sig_name, max_len, seed).dump(2) << "\n";
    } else {
      io.out << impls[0] << " vs " << impls[1] << " at " << sig_name << ": " << r.agree << " agree, " << r.disagree
             << " disagree, " << r.inconclusive << " inconclusive (" << r.clients << " clients)\n";
      if (r.first) {
        io.out << "counterexample (seed " << r.first->seed << "): " << r.first->shrunk.str() << "\n";
        io.out << "  " << impls[0] << ": " << describe(r.first->left) << "\n";
        io.out << "  " << impls[1] << ": " << describe(r.first->right) << "\n";
      }
    }
    return kOk;
  } catch (const TypeErrorException& e) {
    return report(io, file, e.error, json);
  }
}

}  // namespace modtt::cli
