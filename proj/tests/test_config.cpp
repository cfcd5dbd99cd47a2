#include "catch_amalgamated.hpp"

#include "solitonlab/config.hpp"
#include "solitonlab/errors.hpp"
#include "solitonlab/io.hpp"

using namespace solitonlab;

TEST_CASE("config defaults and round trip") {
  const auto c = parse_config("");
  REQUIRE(c.model.lambda == 0.3);
  REQUIRE(c.n == 2048);
  REQUIRE(c.half_width == 80.0);
  REQUIRE(c.integrator.layer.enabled);
  const std::string text = to_config_text(c);
  REQUIRE(to_config_text(parse_config(text)) == text);
}

TEST_CASE("shipped configs parse") {
  const auto d = load_config(SOLITONLAB_SOURCE_DIR "/configs/default.cfg");
  REQUIRE(d.model.potential.depth == 0.15);
  REQUIRE(d.model.potential.h == 0.6);
  REQUIRE(d.integrator.T == 1000.0);
  REQUIRE(d.initial.z1 == 0.05);
  REQUIRE(d.fgr.deltas.size() == 3);
  const auto c = load_config(SOLITONLAB_SOURCE_DIR "/configs/conservation.cfg");
  REQUIRE_FALSE(c.integrator.layer.enabled);
  REQUIRE(c.propagator.layer.enabled);
  REQUIRE(c.integrator.T == 100.0);
}

TEST_CASE("config values") {
  const auto c = parse_config(R"(
# comment line
[model]
lambda = 0.35   # trailing comment
h = 0.4
nonlinearity = saturable
saturable_q = 5
saturable_gamma = 0.5
[fgr]
deltas = 0.02, 0.01
box_L = 0
[output]
seed = 7
)");
  REQUIRE(c.model.lambda == 0.35);
  REQUIRE(c.model.potential.h == 0.4);
  REQUIRE(c.model.nonlinearity.kind == NonlinearityKind::saturable);
  REQUIRE(c.model.nonlinearity.q == 5);
  REQUIRE(c.fgr.deltas == std::vector<double>{0.02, 0.01});
  REQUIRE(c.seed == 7);
}

TEST_CASE("config errors") {
  auto bad = [](const std::string& text) { REQUIRE_THROWS_AS(parse_config(text), ConfigError); };
  bad("[model]\nlamda = 0.3\n");
  bad("[modle]\nlambda = 0.3\n");
  bad("lambda = 0.3\n");
  bad("[model]\nlambda = abc\n");
  bad("[model]\nlambda = 0.3\nlambda = 0.4\n");
  bad("[model]\nlambda\n");
  bad("[model\nlambda = 0.3\n");
  bad("[grid]\nn = 1000\n");
  bad("[grid]\nn = -4\n");
  bad("[integrator]\ndt = 0\n");
  bad("[integrator]\nlayer = maybe\n");
  bad("[fgr]\ndeltas = 0.01, 0.02\n");
  bad("[model]\nnonlinearity = quartic\n");
  bad("[model]\nnonlinearity = power_series\n");
  bad("[diagnostics]\ncompanion_scale = 1.5\n");
  try {
    parse_config("[model]\n\nlamda = 0.3\n");
    FAIL("no exception");
  } catch (const ConfigError& e) {
    REQUIRE(std::string(e.what()).find("line 3") != std::string::npos);
    REQUIRE(std::string(e.what()).find("lamda") != std::string::npos);
  }
  REQUIRE_THROWS_AS(load_config("/nonexistent/x.cfg"), ConfigError);
}

TEST_CASE("json output uses 17 significant digits") {
  nlohmann::json j;
  j["b"] = 0.1;
  j["a"] = {1, 2.5};
  j["n"] = std::nan("");
  const std::string s = dump_json(j);
  REQUIRE(s.find("0.10000000000000001") != std::string::npos);
  REQUIRE(s.find("\"n\": null") != std::string::npos);
  REQUIRE(s.find("\"a\"") < s.find("\"b\""));
  REQUIRE(nlohmann::json::parse(s)["b"].get<double>() == 0.1);
}
