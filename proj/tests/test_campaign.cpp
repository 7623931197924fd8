#include <gtest/gtest.h>

#include <algorithm>

#include <ocmt/ocmt.hpp>

using namespace ocmt;

namespace {

CampaignConfig small_campaign()
{
    CampaignConfig c;
    c.dgp = 2;
    c.n = 200;
    c.p_n = 30;
    c.forecast_n = 50;
    c.seed = 17;
    c.replications = 6;
    c.pipelines = {Pipeline::one_stage, Pipeline::ocmt, Pipeline::post_ocmt, Pipeline::aglasso};
    return c;
}

} // namespace

TEST(Pipeline, Names)
{
    for (auto p : {Pipeline::one_stage, Pipeline::ocmt, Pipeline::post_ocmt, Pipeline::aglasso}) {
        EXPECT_EQ(parse_pipeline(to_string(p)), p);
    }
    EXPECT_EQ(parse_pipeline("aglasso-only"), Pipeline::aglasso);
    EXPECT_THROW(parse_pipeline("lasso"), ConfigError);
}

TEST(FitPipelines, CleanupNeverEnlargesOcmt)
{
    for (std::uint64_t r = 0; r < 4; ++r) {
        const auto draw = generate(DgpSpec{2, 300, 40, 0, 3, r});
        const auto fits = fit_pipelines(draw.dataset, OcmtConfig{},
                                        {Pipeline::ocmt, Pipeline::post_ocmt, Pipeline::one_stage});
        ASSERT_EQ(fits.size(), 3u);
        const auto& o = fits[0].selected;
        const auto& post = fits[1].selected;
        EXPECT_TRUE(std::includes(o.begin(), o.end(), post.begin(), post.end()));
        EXPECT_EQ(fits[0].stage_count(), fits[0].screening->stage_count);
        EXPECT_FALSE(fits[1].stage_count().has_value());
        EXPECT_EQ(fits[2].stage_count(), 1);
        EXPECT_EQ(fits[1].model.variables(), post);
        EXPECT_TRUE(fits[1].lasso.has_value());
    }
}

TEST(Campaign, DeterministicAcrossRunsAndWorkers)
{
    auto cfg = small_campaign();
    cfg.workers = 1;
    const auto a = campaign_document(run_campaign(cfg)).dump(2);
    const auto b = campaign_document(run_campaign(cfg)).dump(2);
    cfg.workers = 8;
    const auto c = campaign_document(run_campaign(cfg)).dump(2);
    EXPECT_EQ(a, b);
    EXPECT_EQ(a, c);
}

TEST(Campaign, ReportsEveryPipeline)
{
    const auto res = run_campaign(small_campaign());
    EXPECT_EQ(res.failures, 0);
    ASSERT_EQ(res.reports.size(), 4u);
    EXPECT_EQ(res.reports[0].second.replications, 6);
    EXPECT_TRUE(res.reports[0].second.step.has_value());
    EXPECT_TRUE(res.reports[1].second.step.has_value());
    EXPECT_FALSE(res.reports[2].second.step.has_value());
    EXPECT_FALSE(res.reports[3].second.step.has_value());
    const auto doc = campaign_document(res);
    EXPECT_EQ(doc["schema_version"], result_schema_version);
    EXPECT_EQ(doc["replications"].size(), 6u);
    EXPECT_EQ(doc["summary"].size(), 4u);
    EXPECT_FALSE(doc["config"].contains("workers"));
    const auto table = format_table(res);
    EXPECT_NE(table.find("aglasso"), std::string::npos);
}

TEST(Campaign, Validation)
{
    auto c = small_campaign();
    c.replications = 0;
    EXPECT_THROW(run_campaign(c), ConfigError);
    c = small_campaign();
    c.pipelines.clear();
    EXPECT_THROW(run_campaign(c), ConfigError);
    c = small_campaign();
    c.dgp = 12;
    EXPECT_THROW(run_campaign(c), ConfigError);
}

TEST(Holdout, SplitsPartitionRows)
{
    const auto [train, test] = holdout_split(50, 12, 7, 3);
    EXPECT_EQ(train.size(), 38u);
    EXPECT_EQ(test.size(), 12u);
    std::vector<int> all = train;
    all.insert(all.end(), test.begin(), test.end());
    std::sort(all.begin(), all.end());
    for (int i = 0; i < 50; ++i) EXPECT_EQ(all[i], i);
    EXPECT_EQ(holdout_split(50, 12, 7, 3).second, test);
    EXPECT_NE(holdout_split(50, 12, 7, 4).second, test);
}

TEST(Select, DocumentIsReproducible)
{
    const auto draw = generate(DgpSpec{1, 150, 15, 0, 2, 0});
    SelectInputs in;
    in.data_path = "memory";
    in.pipelines = {Pipeline::ocmt, Pipeline::post_ocmt};
    in.holdout = HoldoutConfig{30, 5, 9};
    const auto r1 = run_select(draw.dataset, in.ocmt, in.pipelines, in.holdout);
    const auto r2 = run_select(draw.dataset, in.ocmt, in.pipelines, in.holdout);
    const auto d1 = select_document(in, draw.dataset, r1);
    EXPECT_EQ(d1.dump(), select_document(in, draw.dataset, r2).dump());
    ASSERT_EQ(d1["results"].size(), 2u);
    EXPECT_TRUE(d1["results"][0].contains("statistics_trace"));
    EXPECT_EQ(d1["holdout"]["pipelines"].size(), 2u);
    EXPECT_EQ(d1["holdout"]["pipelines"][0]["completed"], 5);
    EXPECT_THROW(run_holdout(draw.dataset, in.ocmt, in.pipelines, HoldoutConfig{150, 5, 0}), ConfigError);
}
