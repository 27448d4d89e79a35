#include "persistlab/cli.hpp"

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace persistlab;

namespace {

Table small_table()
{
    Table t;
    t.title = "demo";
    t.columns = {{"n", "1"}, {"label", "1"}, {"p", "probability"}, {"ok", "1"}, {"gap", "1"}};
    t.config = {{"seed", "3"}};
    t.summary = {{"b_hat", 0.25}};
    t.add_row({std::int64_t{4}, std::string("a,b"), 0.1, true, std::monostate{}});
    t.add_row({std::int64_t{5}, std::string("say \"hi\""), std::numeric_limits<double>::infinity(), false, 1e-300});
    return t;
}

RunConfig config(const std::string& command)
{
    RunConfig c;
    c.command = command;
    return c;
}

} // namespace

TEST(Csv, QuotingAndNumbers)
{
    EXPECT_EQ(csv_field("plain"), "plain");
    EXPECT_EQ(csv_field("a,b"), "\"a,b\"");
    EXPECT_EQ(csv_field("q\"q"), "\"q\"\"q\"");
    EXPECT_EQ(csv_field("line\nbreak"), "\"line\nbreak\"");
    EXPECT_EQ(format_double(0.1), "0.1");
    EXPECT_EQ(format_double(1e-300), "1e-300");
    EXPECT_EQ(format_double(-std::numeric_limits<double>::infinity()), "-inf");
    // Shortest round-trip formatting.
    for (double v : {1.0 / 3.0, 2.718281828459045, 6.02214076e23}) EXPECT_EQ(std::stod(format_double(v)), v);
}

TEST(Csv, LayoutAndPayload)
{
    const std::string csv = to_csv(small_table(), "9.9");
    std::istringstream in(csv);
    std::string line;
    std::getline(in, line);
    EXPECT_EQ(line, "# persistlab 9.9 demo");
    std::getline(in, line);
    EXPECT_EQ(line.rfind(kGeneratedPrefix, 0), 0u);
    std::getline(in, line);
    EXPECT_EQ(line, "# config: seed=3");
    std::getline(in, line);
    EXPECT_EQ(line, "# units: n[1] label[1] p[probability] ok[1] gap[1]");
    std::getline(in, line);
    EXPECT_EQ(line, "# result: b_hat=0.25");
    std::getline(in, line);
    EXPECT_EQ(line, "n,label,p,ok,gap");
    std::getline(in, line);
    EXPECT_EQ(line, "4,\"a,b\",0.1,true,");
    std::getline(in, line);
    EXPECT_EQ(line, "5,\"say \"\"hi\"\"\",inf,false,1e-300");
    EXPECT_EQ(csv_payload(csv), to_csv(small_table(), "9.9", false));
}

TEST(Json, RecordsAndMeta)
{
    const auto doc = nlohmann::json::parse(to_json(small_table(), "9.9"));
    EXPECT_EQ(doc["meta"]["version"], "9.9");
    EXPECT_EQ(doc["meta"]["config"]["seed"], "3");
    EXPECT_EQ(doc["meta"]["units"]["p"], "probability");
    EXPECT_EQ(doc["summary"]["b_hat"], 0.25);
    ASSERT_EQ(doc["records"].size(), 2u);
    EXPECT_EQ(doc["records"][0]["label"], "a,b");
    EXPECT_TRUE(doc["records"][0]["gap"].is_null());
    EXPECT_EQ(doc["records"][1]["p"], "inf");
    EXPECT_EQ(doc["records"][1]["ok"], false);
}

TEST(Table, Validation)
{
    Table t = small_table();
    EXPECT_THROW(t.add_row({std::int64_t{1}}), std::logic_error);
    EXPECT_THROW(t.column("missing"), std::out_of_range);
    EXPECT_DOUBLE_EQ(t.number(0, "p"), 0.1);
    EXPECT_TRUE(std::isnan(t.number(0, "gap")));
    EXPECT_DOUBLE_EQ(t.summary_number("b_hat"), 0.25);
}

TEST(Svg, WellFormedDocument)
{
    PlotSpec spec{"a < b & c", "x", "y", true, {{"s1", {1, 2, 3}, {0.1, 0.01, 0.001}, {}, {}}}};
    const std::string svg = to_svg(spec);
    EXPECT_NE(svg.find("<svg"), std::string::npos);
    EXPECT_NE(svg.find("</svg>"), std::string::npos);
    EXPECT_NE(svg.find("a &lt; b &amp; c"), std::string::npos);
    EXPECT_EQ(svg.find("a < b"), std::string::npos);
}

TEST(Cli, PersistDegreeOne)
{
    RunConfig c = config("persist");
    c.n = 1;
    c.samples = 100000;
    c.seed = 7;
    const Table t = execute(c);
    ASSERT_EQ(t.rows.size(), 1u);
    const double p = t.number(0, "p_hat");
    EXPECT_NEAR(p, 0.25, 0.01);
    EXPECT_LE(t.number(0, "ci_low"), 0.25);
    EXPECT_GE(t.number(0, "ci_high"), 0.25);
    for (const char* col : {"n", "interval", "successes", "samples", "p_hat", "ci_low", "ci_high", "ratio"})
        EXPECT_NO_THROW(t.column(col));
}

TEST(Cli, PayloadIsReproducible)
{
    RunConfig c = config("persist");
    c.n_list = {3, 6};
    c.samples = 2000;
    c.seed = 5;
    EXPECT_EQ(payload(execute(c), "csv"), payload(execute(c), "csv"));
    c.format = "json";
    EXPECT_EQ(payload(execute(c), "json"), payload(execute(c), "json"));
    RunConfig g = config("game");
    g.n = 4;
    g.samples = 500;
    EXPECT_EQ(payload(execute(g), "csv"), payload(execute(g), "csv"));
}

TEST(Cli, ExitCodes)
{
    std::ostringstream out, err;
    RunConfig bad = config("frobnicate");
    EXPECT_EQ(run(bad, out, err), 2);
    EXPECT_NE(err.str().find("usage error"), std::string::npos);

    RunConfig both = config("persist");
    both.n = 3;
    both.n_list = {3, 4};
    EXPECT_EQ(run(both, out, err), 2);

    RunConfig plot = config("persist");
    plot.n = 1;
    plot.plot = true;
    EXPECT_EQ(run(plot, out, err), 2);

    // Module errors exit 1.
    RunConfig few = config("persist");
    few.n = 3;
    few.samples = 10;
    err.str("");
    EXPECT_EQ(run(few, out, err), 1);
    EXPECT_NE(err.str().find("persist failed"), std::string::npos);
}

TEST(Cli, WritesTableAndPlot)
{
    const auto dir = std::filesystem::temp_directory_path() / "persistlab_cli_test";
    std::filesystem::create_directories(dir);
    RunConfig c = config("game");
    c.n = 3;
    c.samples = 200;
    c.plot = true;
    c.out = (dir / "game.csv").string();
    std::ostringstream out, err;
    ASSERT_EQ(run(c, out, err), 0) << err.str();
    EXPECT_TRUE(out.str().empty());
    std::ifstream csv(c.out), svg(c.out + ".svg");
    ASSERT_TRUE(csv && svg);
    std::string first;
    std::getline(csv, first);
    EXPECT_EQ(first.rfind("# persistlab", 0), 0u);
    std::filesystem::remove_all(dir);
}

TEST(Cli, MnCheckAndB1AreDeterministicTables)
{
    RunConfig m = config("mn-check");
    m.n = 10;
    const Table t = execute(m);
    EXPECT_GT(t.rows.size(), 0u);
    RunConfig b = config("b1-report");
    b.n_list = {1000};
    b.lags = {0.0, 1.0};
    const Table r = execute(b);
    ASSERT_EQ(r.rows.size(), 2u);
    EXPECT_LT(r.number(0, "sup_gap"), 1e-12);
}
