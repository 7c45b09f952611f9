#include <gtest/gtest.h>

#include <filesystem>

#include "sdcancel/config.hpp"
#include "sdcancel/report.hpp"

using namespace sdcancel;
using nlohmann::json;

namespace {

json minimal_doc() {
  return json::parse(R"({
    "relay": {"h": 1.0, "a2": 1000.0},
    "channel": {"r": 0.2, "L": 1.0}
  })");
}

}  // namespace

TEST(Config, DefaultsFilledIn) {
  const ExperimentConfig cfg = config_from_json(minimal_doc());
  EXPECT_EQ(cfg.design.N, 16);
  EXPECT_EQ(cfg.design.verify_N(), 32);
  EXPECT_EQ(cfg.sim.oversample, 64);
  EXPECT_DOUBLE_EQ(cfg.f, 1.0e4);
  EXPECT_EQ(cfg.W.den, (std::vector<double>{2.0, 1.0}));
  EXPECT_NO_THROW(cfg.validate());
}

TEST(Config, RoundTripIsIdentity) {
  for (const ExperimentConfig& cfg :
       {nominal_example_config(1000.0), nominal_example_config(100.0),
        robust_example_config()}) {
    const json once = config_to_json(cfg);
    const ExperimentConfig back = config_from_json(once);
    EXPECT_EQ(config_to_json(back).dump(), once.dump());
  }
  ExperimentConfig c = robust_example_config();
  c.channel.extra_paths = {{0.014, 1.1}};
  c.sim.kind = InputKind::kUnitNormL2;
  c.sim.filter = InputFilter::kNone;
  c.sim.seed = 123456789012345ULL;
  c.sim.oversample = 80;
  const json once = config_to_json(c);
  EXPECT_EQ(config_to_json(config_from_json(once)).dump(), once.dump());
}

TEST(Config, UnknownKeysRejected) {
  for (const char* path : {"/typo", "/relay/gain", "/channel/extra", "/design/solver",
                           "/sim/speed"}) {
    json doc = minimal_doc();
    doc["design"] = json::object();
    doc["sim"] = json::object();
    doc[json::json_pointer(path)] = 1;
    EXPECT_THROW(config_from_json(doc), ConfigError) << path;
  }
  json doc = minimal_doc();
  doc["sim"]["input"] = {{"shape", "square"}};
  EXPECT_THROW(config_from_json(doc), ConfigError);
  doc = minimal_doc();
  doc["channel"]["extra_paths"] = json::array({{{"r", 0.01}, {"L", 1.5}, {"phase", 0}}});
  EXPECT_THROW(config_from_json(doc), ConfigError);
}

TEST(Config, InvariantsRechecked) {
  json doc = minimal_doc();
  doc["relay"]["a2"] = -3.0;
  EXPECT_THROW(config_from_json(doc).validate(), ConfigError);
  doc = minimal_doc();
  doc["relay"]["W"] = {{"num", {1.0}}, {"den", {}}};
  EXPECT_THROW(config_from_json(doc), ConfigError);
  doc = minimal_doc();
  doc["relay"]["h"] = "one";
  EXPECT_THROW(config_from_json(doc), ConfigError);
  doc = minimal_doc();
  doc["design"] = {{"mode", "lqr"}};
  EXPECT_THROW(config_from_json(doc), ConfigError);
}

TEST(Config, OffGridDelayNamed) {
  json doc = minimal_doc();
  doc["channel"]["L"] = 1.03;
  const ExperimentConfig cfg = config_from_json(doc);
  try {
    cfg.validate();
    FAIL() << "expected an off-grid error";
  } catch (const OffGridDelayError& e) {
    EXPECT_NE(std::string(e.what()).find("delay not on FSFH grid"), std::string::npos);
  }
}

TEST(Config, ZeroPaGainAccepted) {
  json doc = minimal_doc();
  doc["relay"]["a2"] = 0.0;
  EXPECT_NO_THROW(config_from_json(doc).validate());
}

TEST(Config, BundledFilesLoad) {
  const std::filesystem::path dir = std::filesystem::path(SDCANCEL_SOURCE_DIR) / "configs";
  int count = 0;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.path().extension() != ".json") continue;
    EXPECT_NO_THROW(load_config(entry.path().string()).validate()) << entry.path();
    ++count;
  }
  EXPECT_GE(count, 4);
}

TEST(Report, ControllerRoundTrip) {
  Controller k;
  Matrix a(2, 2), b(2, 2), c(2, 2), d(2, 2);
  a << 0.5, 0.1, -0.2, 0.3;
  b << 1, 2, 3, 4;
  c << 0.1, 0.2, 0.3, 0.4;
  d << 1e-17, 0, 0, 1.0 / 3.0;
  k.sys = StateSpace::Discrete(a, b, c, d, 1.0);
  k.method = DesignMethod::kRobustQParam;
  k.gamma1 = 0.78;
  k.gamma2 = 0.95;
  k.meta.N = 4;
  k.meta.n_q = 8;
  const Controller back = controller_from_json(controller_to_json(k));
  EXPECT_TRUE(back.sys.a() == a);
  EXPECT_TRUE(back.sys.d() == d);
  EXPECT_EQ(back.sys.period(), 1.0);
  EXPECT_EQ(back.method, k.method);
  EXPECT_EQ(back.gamma2, 0.95);
  EXPECT_EQ(back.meta.n_q, 8);
  // a full report works as well
  const json report = {{"controller", controller_to_json(k)}};
  EXPECT_TRUE(controller_from_json(report).sys.b() == b);
  EXPECT_THROW(controller_from_json(json{{"A", 1}}), ConfigError);
}

TEST(Report, TraceCsvFormat) {
  SimulationTrace tr;
  tr.t = {0.0, 0.125};
  tr.v = Matrix::Constant(2, 2, 1.0 / 3.0);
  tr.u = Matrix::Zero(2, 2);
  tr.err = tr.v - tr.u;
  std::ostringstream out;
  write_trace_csv(out, tr);
  const std::string text = out.str();
  EXPECT_EQ(text.substr(0, text.find('\n')), "t,v_I,v_Q,u_I,u_Q,err_I,err_Q");
  EXPECT_NE(text.find("0.125,0.333333333333,0.333333333333,0,0,"), std::string::npos);
}
