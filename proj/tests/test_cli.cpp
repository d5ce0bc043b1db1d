#include <gtest/gtest.h>

#include "modtt/cli.hpp"
#include "support/corpus.hpp"

using namespace modtt;
using namespace modtt::testing;

namespace {

struct Run {
  int code;
  std::string out, err;
};

Run invoke(std::vector<std::string> args) {
  args.insert(args.begin(), "modtt");
  std::vector<const char*> argv;
  for (auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  cli::Streams io{out, err, false};
  int code = cli::run(static_cast<int>(argv.size()), argv.data(), io);
  return {code, out.str(), err.str()};
}

std::string path(const std::string& rel) { return corpus_dir() + "/" + rel; }

std::string golden_name(std::string rel) {
  rel = rel.substr(0, rel.size() - 4);
  for (auto& c : rel)
    if (c == '/') c = '_';
  return std::string(MODTT_GOLDEN_DIR) + "/" + rel + ".core";
}

}  // namespace

TEST(Cli, CheckQueues) {
  auto r = invoke({"check", path("queues.mtt")});
  EXPECT_EQ(r.code, cli::kOk);
  EXPECT_NE(r.out.find("ok"), std::string::npos);
}

TEST(Cli, CheckExtentMismatch) {
  auto r = invoke({"check", path("bad/extent-mismatch.mtt")});
  EXPECT_EQ(r.code, cli::kTypeError);
  EXPECT_NE(r.err.find("[extent-side-condition]"), std::string::npos) << r.err;
  // diagnostics carry a position
  EXPECT_NE(r.err.find("extent-mismatch.mtt:8:"), std::string::npos) << r.err;
}

TEST(Cli, CheckJsonError) {
  auto r = invoke({"check", "--json", path("bad/unbound.mtt")});
  EXPECT_EQ(r.code, cli::kTypeError);
  auto j = nlohmann::json::parse(r.out);
  EXPECT_EQ(j["ok"], false);
  EXPECT_EQ(j["error"]["kind"], "unbound");
  EXPECT_EQ(j["error"]["span"]["line"], 1);
}

TEST(Cli, EvalDemo) {
  auto r = invoke({"eval", path("queue-demo.mtt")});
  EXPECT_EQ(r.code, cli::kOk);
  EXPECT_EQ(r.out, "tt\n");
}

TEST(Cli, EvalThrowAndFuel) {
  auto tmp = std::filesystem::temp_directory_path() / "modtt_cli_throw.mtt";
  {
    std::ofstream f(tmp);
    // earlier bound items run first, so the throwing one comes last
    f << corpus_file("queues.mtt") << "\nval long : bool list = rev (tt :: ff :: tt :: ff :: tt :: ff :: nil)\n"
      << "val main <- Q0.rem Q0.emp\n";
  }
  EXPECT_EQ(invoke({"eval", tmp.string()}).code, cli::kThrew);
  EXPECT_EQ(invoke({"eval", tmp.string(), "--item", "long", "--fuel", "3"}).code, cli::kFuel);
  auto ok = invoke({"eval", tmp.string(), "--item", "long", "--json"});
  EXPECT_EQ(ok.code, cli::kOk);
  EXPECT_EQ(nlohmann::json::parse(ok.out)["value"], "(cons ff (cons tt (cons ff (cons tt (cons ff (cons tt nil))))))");
  std::filesystem::remove(tmp);
}

TEST(Cli, Static) {
  auto r = invoke({"static", path("good/show.mtt"), "ShowBool"});
  EXPECT_EQ(r.code, cli::kOk);
  EXPECT_NE(r.out.find("skeleton: (Ext (Sigma Type *) (pair bool *))"), std::string::npos) << r.out;
}

TEST(Cli, ParamTest) {
  auto r = invoke({"param-test", path("queues.mtt"), "--impl", "Q0", "--impl", "Q1", "--sig", "QUEUE", "--clients",
                "50", "--json"});
  EXPECT_EQ(r.code, cli::kOk);
  auto j = nlohmann::json::parse(r.out);
  EXPECT_EQ(j["agree"], 50);
  EXPECT_EQ(j["disagree"], 0);
  EXPECT_TRUE(j["counterexample"].is_null());

  auto m = invoke({"param-test", path("queues.mtt"), "--impl", "Q0", "--impl", "Q1_negated", "--sig", "QUEUE",
                "--clients", "50", "--json"});
  EXPECT_EQ(m.code, cli::kOk);
  auto k = nlohmann::json::parse(m.out);
  EXPECT_GE(k["disagree"].get<int>(), 1);
  EXPECT_TRUE(k["counterexample"].contains("shrunk"));
}

TEST(Cli, UsageErrors) {
  EXPECT_EQ(invoke({"frobnicate"}).code, cli::kUsage);
  EXPECT_EQ(invoke({}).code, cli::kUsage);
  EXPECT_EQ(invoke({"check"}).code, cli::kUsage);
  EXPECT_EQ(invoke({"check", "/nonexistent/file.mtt"}).code, cli::kUsage);
  EXPECT_EQ(invoke({"param-test", path("queues.mtt"), "--impl", "Q0", "--sig", "QUEUE"}).code, cli::kUsage);
}

TEST(Cli, Version) {
  auto r = invoke({"version"});
  EXPECT_EQ(r.code, cli::kOk);
  EXPECT_EQ(r.out, std::string("modtt ") + cli::kVersion + "\n");
}

TEST(Cli, GoodCorpusChecksBadCorpusFails) {
  for (auto& f : good_files()) EXPECT_EQ(invoke({"check", path(f)}).code, cli::kOk) << f;
  for (auto& f : bad_files()) {
    auto r = invoke({"check", path(f + ".mtt")});
    EXPECT_EQ(r.code, cli::kTypeError) << f;
    auto kind = corpus_file(f + ".expect");
    kind.erase(kind.find_last_not_of(" \n\r\t") + 1);
    EXPECT_NE(r.err.find("[" + kind + "]"), std::string::npos) << f << ": " << r.err;
  }
}

TEST(Golden, EmitCoreMatchesFrozenOutput) {
  for (auto& f : good_files()) {
    auto r = invoke({"elaborate", "--emit-core", path(f)});
    ASSERT_EQ(r.code, cli::kOk) << f;
    EXPECT_EQ(r.out, slurp(golden_name(f))) << f;
  }
}

TEST(Golden, EmitCoreIsByteStable) {
  for (auto& f : good_files()) {
    auto a = invoke({"elaborate", "--emit-core", path(f)});
    auto b = invoke({"elaborate", "--emit-core", path(f)});
    EXPECT_EQ(a.out, b.out) << f;
  }
}

TEST(Golden, EmittedCoreReadsBack) {
  // every printed signature and definition parses to the same term
  auto p = elaborate_file(corpus_file("queues.mtt"));
  for (auto& it : p.items) {
    EXPECT_EQ(to_string(parse_sig(to_string(it.sig))), to_string(it.sig));
    if (!it.bound()) {
      EXPECT_EQ(to_string(parse_val(to_string(it.def))), to_string(it.def));
    }
  }
}
