// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The toposearch Authors

#include "oracles.hpp"
#include "synthetic.hpp"
#include "toposearch/error.hpp"
#include "toposearch/hybrid.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace toposearch;

namespace {

std::vector<IndexedDocument> docs_from(const std::vector<ToponymRecord>& records) {
    std::vector<IndexedDocument> docs;
    for (const auto& r : records) docs.push_back(make_document(r));
    return docs;
}

// Two-document world with hand-set vectors looked up by text.
HybridSearcher two_doc_world(double b_distance_fraction) {
    const GeoPoint a{55.0, 49.0};
    const double dlat = b_distance_fraction * 50000.0 / 6371000.0 * 180.0 / std::numbers::pi;
    std::vector<IndexedDocument> docs{{"A", "ctx a", a, "A"}, {"B", "ctx b", GeoPoint{55.0 + dlat, 49.0}, "B"}};
    VectorTable t;
    t.dim = 2;
    t.ids = {"ctx a", "ctx b", "query"};
    t.values = {0.0f, 1.0f, 1.0f, 0.0f, 1.0f, 0.0f};
    auto provider = std::make_shared<VectorFileProvider>("file", t);
    return HybridSearcher(docs, provider);
}

} // namespace

TEST(Formulas, GeoScore) {
    EXPECT_EQ(geo_score(0.0, 50000.0), 1.0);
    EXPECT_NEAR(geo_score(50000.0, 50000.0), 0.3678794, 1e-7);
    EXPECT_NEAR(geo_score(25000.0, 50000.0), 0.6065307, 1e-7);
    EXPECT_THROW(geo_score(60000.0, 50000.0), InvalidArgument);
    EXPECT_THROW(geo_score(-1.0, 50000.0), InvalidArgument);
    EXPECT_THROW(geo_score(0.0, 0.0), InvalidArgument);
}

TEST(Formulas, MinMaxNormalize) {
    EXPECT_EQ(min_max_normalize(std::vector<double>{2, 2, 2}), (std::vector<double>{1, 1, 1}));
    EXPECT_EQ(min_max_normalize(std::vector<double>{0.1, 0.3}), (std::vector<double>{0.0, 1.0}));
    EXPECT_EQ(min_max_normalize(std::vector<double>{0.1}), (std::vector<double>{1.0}));
    EXPECT_EQ(min_max_normalize(std::vector<double>{0.5, 0.5 + 1e-10}), (std::vector<double>{1.0, 1.0}));
    EXPECT_THROW(min_max_normalize(std::vector<double>{}), InvalidArgument);
}

TEST(Formulas, MaxNormalize) {
    EXPECT_EQ(max_normalize(std::vector<double>{1.0}), (std::vector<double>{1.0}));
    const auto v = max_normalize(std::vector<double>{std::exp(-1.0), 1.0});
    EXPECT_NEAR(v[0], 0.3678794, 1e-7);
    EXPECT_EQ(v[1], 1.0);
    EXPECT_THROW(max_normalize(std::vector<double>{}), InvalidArgument);
    EXPECT_THROW(max_normalize(std::vector<double>{0.0, 1.0}), InvalidArgument);
}

TEST(Formulas, Combine) {
    EXPECT_NEAR(combine(0.5, 1.0, 0.1), 0.95, 1e-12);
    EXPECT_NEAR(combine(1.0, 0.0, 0.1), 0.1, 1e-12);
    for (double a : {0.0, 0.3, 1.0}) EXPECT_NEAR(combine(1.0, 1.0, a), 1.0, 1e-12);
    EXPECT_THROW(combine(1.2, 0.5, 0.1), InvalidArgument);
    EXPECT_THROW(combine(0.5, 0.5, -0.1), InvalidArgument);
}

TEST(HybridSearch, SingleCandidateScoresOne) {
    std::vector<IndexedDocument> docs{{"only", "село Рантамак", GeoPoint{55.2, 52.9}, "Рантамак"},
                                      {"far", "озеро Кабан", GeoPoint{40.0, 30.0}, "Кабан"}};
    const HybridSearcher s(docs, std::make_shared<HashingProvider>());
    SearchQuery q;
    q.text = "Кабан";
    q.point = GeoPoint{55.21, 52.89};
    const auto r = s.search(q);
    ASSERT_EQ(r.hits.size(), 1u);
    EXPECT_EQ(r.hits[0].doc_id, "only");
    EXPECT_EQ(r.hits[0].combined, 1.0);
    EXPECT_EQ(*r.hits[0].sem_norm, 1.0);
    EXPECT_EQ(*r.hits[0].geo_norm, 1.0);
}

TEST(HybridSearch, NearDocumentBeatsSemanticallyBetterFarDocument) {
    const auto s = two_doc_world(0.999);
    SearchQuery q;
    q.text = "query";
    q.point = GeoPoint{55.0, 49.0};
    const auto r = s.search(q);
    ASSERT_EQ(r.hits.size(), 2u);
    EXPECT_EQ(r.hits[0].doc_id, "A");
    EXPECT_NEAR(r.hits[0].combined, 0.9, 1e-9);
    EXPECT_NEAR(r.hits[1].combined, 0.1 + 0.9 * std::exp(-0.999), 1e-6);
}

TEST(HybridSearch, FallbacksAndErrors) {
    const auto s = two_doc_world(0.5);
    SearchQuery q;
    q.text = "query";
    auto r = s.search(q);
    EXPECT_EQ(r.method, Method::SemanticOnly);
    ASSERT_EQ(r.diagnostics.size(), 1u);
    EXPECT_EQ(r.hits[0].doc_id, "B");

    q.point = GeoPoint{10.0, 10.0};
    r = s.search(q);
    EXPECT_TRUE(r.hits.empty());
    ASSERT_EQ(r.diagnostics.size(), 1u);
    EXPECT_EQ(r.diagnostics[0].rfind("no-candidates", 0), 0u);

    SearchQuery sp;
    sp.method = Method::SpatialOnly;
    EXPECT_THROW(s.search(sp), InvalidArgument);
    q.alpha = 1.5;
    EXPECT_THROW(s.search(q), InvalidArgument);
    q.alpha = 0.1;
    q.k = 0;
    EXPECT_THROW(s.search(q), InvalidArgument);
    q.k = 5;
    q.radius_m = 0;
    EXPECT_THROW(s.search(q), InvalidArgument);
}

TEST(HybridSearch, MatchesBruteForceOracle) {
    std::mt19937_64 rng(21);
    for (int corpus = 0; corpus < 4; ++corpus) {
        synth::SyntheticOptions o;
        o.count = 300 + 400 * static_cast<std::size_t>(corpus);
        o.seed = 100 + corpus;
        o.coordinate_share = 0.9;
        const auto records = synth::synthetic_records(o);
        const auto docs = docs_from(records);
        const HybridSearcher s(docs, std::make_shared<HashingProvider>());
        std::vector<std::vector<float>> vecs;
        for (const auto& d : docs) vecs.push_back(hash_encode(d.context).values);
        std::uniform_real_distribution<double> lat(54.0, 57.0), lon(47.0, 53.0), alpha(0.0, 1.0), radius(20000, 120000);
        for (int i = 0; i < 30; ++i) {
            const auto& r = records[rng() % records.size()];
            SearchQuery q;
            q.text = "Где находится " + r.display_name() + "?";
            q.point = GeoPoint{lat(rng), lon(rng)};
            q.alpha = i % 3 == 0 ? 0.1 : alpha(rng);
            q.radius_m = radius(rng);
            q.k = 1 + rng() % 10;
            const auto got = s.search(q).hits;
            const auto want = oracle::hybrid(docs, vecs, hash_encode(q.text).values, q.point->lat_deg, q.point->lon_deg,
                                             q.radius_m, q.alpha, q.k);
            ASSERT_EQ(got.size(), want.size());
            for (std::size_t j = 0; j < got.size(); ++j) {
                EXPECT_EQ(got[j].doc_id, want[j].doc_id);
                EXPECT_EQ(got[j].rank, j + 1);
                EXPECT_NEAR(got[j].combined, want[j].combined, 1e-9);
                EXPECT_NEAR(*got[j].sem_score, want[j].sem, 1e-9);
                EXPECT_NEAR(*got[j].distance_m, want[j].distance, 1e-6);
                EXPECT_LE(*got[j].distance_m, q.radius_m);
            }
        }
    }
}

TEST(HybridSearch, AlphaEndpointsReduceToSingleSignal) {
    synth::SyntheticOptions o;
    o.count = 800;
    o.seed = 5;
    const auto docs = docs_from(synth::synthetic_records(o));
    const HybridSearcher s(docs, std::make_shared<HashingProvider>());
    SearchQuery q;
    q.text = "река у деревни";
    q.point = GeoPoint{55.5, 50.0};
    q.radius_m = 60000;
    q.k = 1000;
    q.alpha = 0.0;
    const auto geo = s.search(q).hits;
    ASSERT_GT(geo.size(), 5u);
    for (std::size_t i = 1; i < geo.size(); ++i) EXPECT_LE(*geo[i - 1].distance_m, *geo[i].distance_m);
    q.alpha = 1.0;
    const auto sem = s.search(q).hits;
    for (std::size_t i = 1; i < sem.size(); ++i) EXPECT_GE(*sem[i - 1].sem_score, *sem[i].sem_score);
}

TEST(HybridSearch, MovingCloserNeverLowersGeoRank) {
    synth::SyntheticOptions o;
    o.count = 300;
    o.seed = 6;
    auto docs = docs_from(synth::synthetic_records(o));
    const GeoPoint c{55.5, 50.0};
    SearchQuery q;
    q.text = "село";
    q.point = c;
    q.radius_m = 80000;
    q.k = 1000;
    q.alpha = 0.0;
    auto position = [&](const std::vector<IndexedDocument>& d, const std::string& id) {
        const auto hits = HybridSearcher(d, std::make_shared<HashingProvider>()).search(q).hits;
        for (const auto& h : hits) if (h.doc_id == id) return h.rank;
        return std::size_t{0};
    };
    const auto before = HybridSearcher(docs, std::make_shared<HashingProvider>()).search(q).hits;
    ASSERT_GT(before.size(), 3u);
    const std::string id = before.back().doc_id;
    const std::size_t old_rank = before.back().rank;
    for (auto& d : docs) {
        if (d.doc_id == id) d.point = GeoPoint{(d.point->lat_deg + c.lat_deg) / 2, (d.point->lon_deg + c.lon_deg) / 2};
    }
    const auto new_rank = position(docs, id);
    ASSERT_NE(new_rank, 0u);
    EXPECT_LE(new_rank, old_rank);
}

TEST(HybridSearch, DeterministicAndMethodsWork) {
    synth::SyntheticOptions o;
    o.count = 200;
    o.coordinate_share = 0.8;
    const auto records = synth::synthetic_records(o);
    const HybridSearcher s(docs_from(records), std::make_shared<HashingProvider>());
    SearchQuery q;
    q.text = records[3].display_name();
    q.point = GeoPoint{55.5, 50.0};
    q.radius_m = 200000;
    const auto a = s.search(q), b = s.search(q);
    ASSERT_EQ(a.hits.size(), b.hits.size());
    for (std::size_t i = 0; i < a.hits.size(); ++i) EXPECT_EQ(a.hits[i].doc_id, b.hits[i].doc_id);

    q.method = Method::Bm25;
    EXPECT_EQ(s.search(q).hits[0].doc_id, records[3].id);
    q.method = Method::SpatialOnly;
    const auto sp = s.search(q).hits;
    for (std::size_t i = 1; i < sp.size(); ++i) EXPECT_LE(*sp[i - 1].distance_m, *sp[i].distance_m);
    q.method = Method::SemanticOnly;
    q.text = make_document(records[3]).context;
    const auto self = s.search(q).hits;
    EXPECT_EQ(self[0].doc_id, records[3].id);
    EXPECT_NEAR(*self[0].sem_score, 1.0, 1e-5);
    EXPECT_EQ(parse_method("semantic"), Method::SemanticOnly);
    EXPECT_THROW(parse_method("fuzzy"), InvalidArgument);
}

TEST(GridSearch, TieRuleAndErrors) {
    const auto s = two_doc_world(0.5);
    LabeledQuery lq;
    lq.query.text = "query";
    lq.query.point = GeoPoint{55.0, 49.0};
    lq.gold_doc_id = "A";
    const std::vector<LabeledQuery> qs{lq};
    EXPECT_EQ(grid_search_alpha(s, qs, std::vector<double>{0.5}, 50000).best_alpha, 0.5);
    const auto all = grid_search_alpha(s, qs, kDefaultAlphaGrid, 50000);
    EXPECT_EQ(all.best_alpha, 0.1);
    ASSERT_EQ(all.table.size(), 5u);
    for (const auto& row : all.table) EXPECT_EQ(row.mean_recall_at_5, 1.0);
    EXPECT_THROW(grid_search_alpha(s, std::span<const LabeledQuery>{}, kDefaultAlphaGrid, 50000), InvalidArgument);
    EXPECT_THROW(grid_search_alpha(s, qs, std::vector<double>{}, 50000), InvalidArgument);
}

TEST(GridSearch, RandomSemanticsFavourSmallestAlpha) {
    // Clusters of 30 documents on an 8 km lattice, clusters far apart.
    std::vector<IndexedDocument> docs;
    std::vector<LabeledQuery> qs;
    std::mt19937_64 rng(8);
    for (int c = 0; c < 6; ++c) {
        const double lat0 = 50.0 + 2.0 * c, lon0 = 40.0 + 3.0 * c;
        for (int i = 0; i < 5; ++i) {
            for (int j = 0; j < 6; ++j) {
                const std::string id = "c" + std::to_string(c) + "_" + std::to_string(i) + std::to_string(j);
                const GeoPoint p{lat0 + i * 8000.0 / 111194.9, lon0 + j * 8000.0 / (111194.9 * std::cos(lat0 * std::numbers::pi / 180))};
                docs.push_back({id, "документ " + id, p, id});
                LabeledQuery lq;
                lq.query.text = "запрос " + id;
                lq.query.point = p;
                lq.gold_doc_id = id;
                qs.push_back(lq);
            }
        }
    }
    std::shuffle(qs.begin(), qs.end(), rng);
    qs.resize(60);
    const HybridSearcher s(docs, std::make_shared<synth::RandomProvider>(32));
    const auto res = grid_search_alpha(s, qs, kDefaultAlphaGrid, 50000);
    EXPECT_EQ(res.best_alpha, 0.1);
    EXPECT_EQ(res.table[0].mean_recall_at_5, 1.0);
    EXPECT_LT(res.table[4].mean_recall_at_5, 1.0);
}
