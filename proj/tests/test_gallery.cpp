#include <gtest/gtest.h>

#include "hmcheck/gallery.hpp"

using namespace hmc;

TEST(Gallery, CatalogEntriesBuild) {
  for (const auto& name : catalog()) {
    const GalleryEntry e = builtin(name);
    EXPECT_EQ(e.name, name);
    EXPECT_EQ(e.kind == EntryKind::kMetric, e.metric.has_value());
    EXPECT_EQ(e.kind == EntryKind::kMap, e.map.has_value());
    EXPECT_TRUE(e.expected.is_object()) << name;
  }
}

TEST(Gallery, ParsesParameters) {
  EXPECT_EQ(builtin(" flat_projection( 6, 4 ) ").name, "flat_projection(6,4)");
  EXPECT_EQ(builtin("sphere_stereo(5)").metric->dim(), 5);
  EXPECT_THROW(builtin("nope(3)"), GalleryError);
  EXPECT_THROW(builtin("euclidean(x)"), GalleryError);
  EXPECT_THROW(builtin("euclidean"), GalleryError);
  EXPECT_THROW(builtin("example32(7)"), GalleryError);
  EXPECT_THROW(builtin("flat_projection(4,4)"), GalleryError);
}

TEST(Gallery, MetricRoundTrip) {
  for (const char* name : {"sphere_stereo(4)", "hyperbolic_ball(4)", "control_nonflat(4)", "example32_metric(3)"}) {
    const MetricChart c = *builtin(name).metric;
    const MetricChart back = metric_from_json(nlohmann::json::parse(to_json(c).dump()));
    EXPECT_EQ(back.name(), c.name());
    EXPECT_EQ(back.coords(), c.coords());
    for (int i = 0; i < c.dim(); ++i)
      for (int j = 0; j < c.dim(); ++j) EXPECT_TRUE(structurally_equal(back.component(i, j), c.component(i, j)));
    EXPECT_EQ(back.constraint().has_value(), c.constraint().has_value());
    EXPECT_EQ(to_json(back), to_json(c));
  }
}

TEST(Gallery, MapRoundTripAndBuiltinCharts) {
  const SubmersionSpec hopf = *builtin("hopf").map;
  const SubmersionSpec back = map_from_json(to_json(hopf));
  EXPECT_EQ(to_json(back), to_json(hopf));

  const nlohmann::json j = {{"name", "proj"},
                            {"domain", "builtin:euclidean(4)"},
                            {"codomain", "builtin:euclidean(3)"},
                            {"components", {"x2", "x3", "x4"}},
                            {"leaf_coordinate", 0}};
  const SubmersionSpec s = map_from_json(j);
  EXPECT_EQ(s.m(), 4);
  EXPECT_EQ(s.leaf_coordinate, 0);
}

TEST(Gallery, FullMatrixLayoutAccepted) {
  const nlohmann::json j = {{"name", "full"},
                            {"coordinates", {"u", "v"}},
                            {"metric", nlohmann::json::array({nlohmann::json::array({"1", "u"}), nlohmann::json::array({"u", "2"})})},
                            {"box", {{-0.5, 0.5}, {-0.5, 0.5}}}};
  const MetricChart c = metric_from_json(j);
  EXPECT_EQ(c.component(1, 0).source(), "u");
}

TEST(Gallery, SchemaErrorsAreDescriptive) {
  const nlohmann::json missing = {{"name", "m"}, {"coordinates", {"u"}}, {"box", {{0, 1}}}};
  try {
    metric_from_json(missing);
    FAIL();
  } catch (const std::invalid_argument& e) {
    EXPECT_NE(std::string(e.what()).find("\"metric\""), std::string::npos);
  }
  const nlohmann::json badmap = {{"domain", "builtin:hopf"}, {"codomain", "builtin:euclidean(3)"}, {"components", {}}};
  EXPECT_THROW(map_from_json(badmap), std::invalid_argument);
  const nlohmann::json asym = {{"coordinates", {"u", "v"}},
                               {"metric", nlohmann::json::array({nlohmann::json::array({"1", "u"}), nlohmann::json::array({"v", "2"})})},
                               {"box", {{-0.5, 0.5}, {-0.5, 0.5}}}};
  EXPECT_THROW(metric_from_json(asym), std::invalid_argument);
}
