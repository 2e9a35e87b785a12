#include <gtest/gtest.h>

#include <sstream>

#include "oracles.hpp"

using namespace qoescape;

TEST(Format, NineSignificantDigits) {
  EXPECT_EQ(format_g9(0.1), "0.1");
  EXPECT_EQ(format_g9(1.0 / 3.0), "0.333333333");
  EXPECT_EQ(format_g9(123456789012.0), "1.23456789e+11");
  EXPECT_EQ(round9(2.0 / 3.0), 0.666666667);
  EXPECT_EQ(Json(round9(2.0 / 3.0)).dump(), "0.666666667");
}

TEST(Pgm, TwoByTwoMinMax) {
  Layer l(2, 2);
  l(0, 0) = 0.0;
  l(0, 1) = 1.0;
  l(1, 0) = 0.5;
  l(1, 1) = 0.5;
  const auto img = render_pgm(l, Scaling::minmax);
  EXPECT_EQ(img.pixels, (std::vector<std::uint8_t>{0, 255, 127, 127}));
  EXPECT_FALSE(img.constant);
  std::ostringstream out;
  write_pgm(out, img);
  const std::string bytes = out.str();
  EXPECT_EQ(bytes.substr(0, 11), "P5\n2 2\n255\n");
  EXPECT_EQ(bytes.size(), 11u + 4u);
  EXPECT_EQ(static_cast<unsigned char>(bytes[12]), 255);
}

TEST(Pgm, AbsMax) {
  Layer l(1, 3);
  l(0, 0) = -2.0;
  l(0, 1) = 1.0;
  l(0, 2) = 0.0;
  const auto img = render_pgm(l, Scaling::absmax);
  EXPECT_EQ(img.pixels, (std::vector<std::uint8_t>{255, 127, 0}));
  EXPECT_EQ(img.absmax, 2.0);
}

TEST(Pgm, ConstantLayerIsMidGray) {
  const auto h = hop_histogram(generate({spec::Complete{50}}));
  const auto spec = default_grid_spec(h);
  const auto g = scan(h, spec);
  const auto img = render_heatmap(g[LayerId::imbalance], Scaling::minmax);
  EXPECT_TRUE(img.constant);
  for (auto p : img.pixels) EXPECT_EQ(p, 127);
  const auto side = pgm_sidecar(img, spec, "I");
  EXPECT_EQ(side["min"], 0.0);
  EXPECT_EQ(side["max"], 0.0);
  EXPECT_EQ(side["constant"], true);
  EXPECT_EQ(side["scaling"], "minmax");
  EXPECT_TRUE(side.contains("window"));
  EXPECT_THROW(render_pgm(Layer(), Scaling::minmax), ParameterError);
}

TEST(Pgm, HeatmapOrientation) {
  // rows = a (2), cols = h0 (3)
  Layer l(2, 3);
  for (std::size_t i = 0; i < 2; ++i)
    for (std::size_t j = 0; j < 3; ++j) l(i, j) = 10.0 * static_cast<double>(i) + static_cast<double>(j);
  const auto img = render_heatmap(l, Scaling::minmax);
  EXPECT_EQ(img.width, 2u);   // a ascending left to right
  EXPECT_EQ(img.height, 3u);  // h0 descending top to bottom
  // top-left: a index 0, largest h0 -> value 2; bottom-right: a index 1, h0 index 0 -> value 10.
  EXPECT_EQ(img.pixels[0], static_cast<std::uint8_t>(std::floor(2.0 / 12.0 * 255.0)));
  EXPECT_EQ(img.pixels[5], static_cast<std::uint8_t>(std::floor(10.0 / 12.0 * 255.0)));
}

TEST(Pgm, GridCurvatureBandsAtIntegerRows) {
  const auto h = hop_histogram(generate({spec::Grid{7, 7}}));
  const auto spec = default_grid_spec(h);
  const auto g = scan(h, spec);
  const auto img = render_heatmap(g[LayerId::d2I_h0h0], Scaling::absmax);
  // Brightest image row over the strict half of the a axis lies near an integer h0.
  std::size_t best_row = 0;
  double best = -1;
  for (std::size_t r = 0; r < img.height; ++r) {
    double sum = 0;
    for (std::size_t c = img.width / 2; c < img.width; ++c) sum += img.pixels[r * img.width + c];
    if (sum > best) best = sum, best_row = r;
  }
  const double h0 = g.h0_values[img.height - 1 - best_row];
  EXPECT_LT(std::fabs(h0 - std::round(h0)), 0.3) << h0;
}

TEST(Json, SnapshotFields) {
  const auto h = CostHistogram::from_classes({{1.0, 1}, {2.0, 1}});
  const auto j = to_json(evaluate(h, SlaPoint(0.1, 1.5)));
  for (const char* key : {"a", "h0", "M", "s_bar", "entropy_bits", "imbalance", "classes"}) {
    EXPECT_TRUE(j.contains(key)) << key;
  }
  EXPECT_EQ(j["s_bar"], 0.5);
  EXPECT_EQ(j["classes"].size(), 2u);
  for (const char* key : {"cost", "count", "weight", "share"}) EXPECT_TRUE(j["classes"][0].contains(key));
}

TEST(Json, DiagnoseAndReports) {
  const auto h = hop_histogram(generate({spec::Star{50}}));
  const auto rows = to_json(diagnose(h, SlaPoint(4.0, 1.5), Parameter::h0));
  for (const char* key : {"cost", "count", "share", "leverage", "sensitivity", "contribution"}) {
    EXPECT_TRUE(rows[0].contains(key));
  }
  const auto small = to_json(fit_small_a_slope(h, 1.96, default_small_a_samples()));
  EXPECT_TRUE(small.contains("k_theory"));
  EXPECT_TRUE(small.contains("k_theory_no_ln2"));
  const auto stairs = to_json(staircase(h));
  EXPECT_EQ(stairs["plateaus"].back()["upper"], "inf");
  const auto doc = document("eval", {{"a", 1}});
  EXPECT_EQ(doc["tool_version"], std::string(kToolVersion));
  EXPECT_TRUE(doc.contains("config"));
}

TEST(Json, RegionDocument) {
  const auto h = hop_histogram(generate({spec::Grid{7, 7}}));
  const auto spec = default_grid_spec(h);
  const auto r = operating_region(scan(h, spec), 0.1, 0.8);
  const auto j = to_json(r, spec);
  for (const char* key : {"i_max", "s_min", "aor_percent", "mcr", "window", "boundary_cell_count"}) {
    EXPECT_TRUE(j.contains(key)) << key;
  }
  EXPECT_EQ(j["window"]["a"]["steps"], 64);
}

TEST(GridCsv, Format) {
  const auto h = CostHistogram::from_classes({{1.0, 1}, {2.0, 1}});
  const auto g = scan(h, GridSpec{{0.5, 1.0, 2, Spacing::linear}, {1.0, 2.0, 3}});
  std::ostringstream out;
  write_grid_csv(out, g);
  const std::string s = out.str();
  EXPECT_EQ(s.find('\r'), std::string::npos);
  std::istringstream in(s);
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "a,h0,I,s_bar,dI_da,dI_dh0,ds_da,ds_dh0,d2I_aa,d2I_h0h0,d2I_ah0");
  std::vector<std::string> rows;
  while (std::getline(in, line)) rows.push_back(line);
  ASSERT_EQ(rows.size(), 6u);
  EXPECT_EQ(rows[0].substr(0, 8), "0.5,1,0.");  // h0 varies fastest
  EXPECT_EQ(rows[1].substr(0, 8), "0.5,1.5,");
  EXPECT_EQ(rows[3].substr(0, 4), "1,1,");
}

TEST(GridCsv, ReadErrors) {
  std::istringstream bad_header("a,b\n");
  EXPECT_THROW(read_grid_csv(bad_header), ParseError);
  std::istringstream bad_field(std::string(kGridCsvHeader) + "\n1,2,3,4,5,6,7,8,9,10,x\n");
  try {
    read_grid_csv(bad_field);
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 2u);
  }
}

TEST(Compare, StarAndPath) {
  std::vector<NamedHistogram> in = {{"star", 50, hop_histogram(generate({spec::Star{50}}))},
                                    {"path", 50, hop_histogram(generate({spec::Path{50}}))}};
  const auto spec = comparison_window(in);
  EXPECT_EQ(spec.h0_axis.max, 49.5);
  const auto rows = compare(in, 0.1, 0.5, spec);
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_NEAR(rows[0].var_h, 0.0384, 5e-5);
  EXPECT_NEAR(rows[1].var_h, 136.0, 5e-5);
  const auto table = comparison_table(rows);
  EXPECT_NE(table.find("star"), std::string::npos);
  EXPECT_NE(table.find("path"), std::string::npos);
  EXPECT_EQ(to_json(rows).size(), 2u);
}

TEST(Compare, NeedsTwoInputs) {
  std::vector<NamedHistogram> one = {{"star", 50, hop_histogram(generate({spec::Star{50}}))}};
  EXPECT_THROW(compare(one, 0.1, 0.5, comparison_window(one)), UsageError);
}

TEST(Compare, ErrorsNameTheTopology) {
  std::vector<NamedHistogram> in = {{"alpha", 50, hop_histogram(generate({spec::Star{50}}))},
                                    {"beta", 50, hop_histogram(generate({spec::Path{50}}))}};
  try {
    compare(in, 2.0, 0.5, comparison_window(in));
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("alpha"), std::string::npos);
  }
}
