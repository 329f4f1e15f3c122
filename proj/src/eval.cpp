// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The toposearch Authors

#include "toposearch/eval.hpp"

#include "toposearch/error.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <random>
#include <sstream>

namespace toposearch {

namespace {

using ordered_json = nlohmann::ordered_json;

constexpr double kDegToRad = std::numbers::pi / 180.0;

GeoPoint displace(const GeoPoint& p, double distance_m, double bearing_rad) {
    const double delta = distance_m / kEarthRadiusM;
    const double phi = p.lat_deg * kDegToRad;
    const double lambda = p.lon_deg * kDegToRad;
    const double phi2 = std::asin(std::sin(phi) * std::cos(delta) + std::cos(phi) * std::sin(delta) * std::cos(bearing_rad));
    double lambda2 = lambda + std::atan2(std::sin(bearing_rad) * std::sin(delta) * std::cos(phi),
                                         std::cos(delta) - std::sin(phi) * std::sin(phi2));
    lambda2 = std::remainder(lambda2, 2.0 * std::numbers::pi);
    return GeoPoint{phi2 / kDegToRad, std::clamp(lambda2 / kDegToRad, -180.0, 180.0)};
}

std::string fill(const std::string& pattern, const std::string& name) {
    std::string out = pattern;
    const auto pos = out.find("{name}");
    if (pos != std::string::npos) out.replace(pos, 6, name);
    return out;
}

std::string method_label(Method m, const EvalParams& p) {
    switch (m) {
    case Method::Bm25: return "BM25";
    case Method::SpatialOnly: return "Spatial only";
    case Method::SemanticOnly: return "Semantic only";
    case Method::Hybrid: {
        char buf[96];
        std::snprintf(buf, sizeof buf, "Hybrid (alpha = %g, R = %g km)", p.alpha, p.radius_m / 1000.0);
        return buf;
    }
    }
    return "";
}

std::string fmt3(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3f", v);
    return buf;
}

ordered_json ci_json(const BootstrapCI& ci) {
    ordered_json j;
    j["value"] = ci.point_estimate;
    j["lower_95"] = ci.lower_95;
    j["upper_95"] = ci.upper_95;
    j["resamples"] = ci.resamples;
    j["seed"] = ci.seed;
    return j;
}

} // namespace

const std::vector<std::string>& eval_query_templates() {
    static const std::vector<std::string> templates{
        "Что такое {name}?", "Где находится {name}?", "Расскажи о {name}", "Что известно о {name}?",
        "Где расположен {name}?"};
    return templates;
}

EvalQuerySets generate_eval_query_sets(std::span<const ToponymRecord> records, std::size_t n_test,
                                       std::size_t n_validation, const EvalQueryOptions& options) {
    if (!(options.russian_probability >= 0.0 && options.russian_probability <= 1.0))
        throw InvalidArgument("russian_probability must lie in [0, 1]");
    if (options.jitter_m < 0.0) throw InvalidArgument("jitter_m must be non-negative");
    std::vector<std::size_t> eligible;
    for (std::size_t i = 0; i < records.size(); ++i) {
        if (records[i].coordinates) eligible.push_back(i);
    }
    if (n_test + n_validation > eligible.size()) {
        throw InvalidArgument("requested " + std::to_string(n_test + n_validation) + " queries but only " +
                              std::to_string(eligible.size()) + " records have coordinates");
    }

    std::mt19937_64 rng(options.seed);
    std::shuffle(eligible.begin(), eligible.end(), rng);
    std::uniform_int_distribution<std::size_t> pick_template(0, eval_query_templates().size() - 1);
    std::bernoulli_distribution russian(options.russian_probability);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    auto render = [&](const ToponymRecord& rec) {
        EvalQuery q;
        const auto& tmpl = eval_query_templates()[pick_template(rng)];
        const bool want_rus = russian(rng);
        const bool use_rus = want_rus ? !rec.name_rus.empty() : rec.name_tat.empty();
        q.language_used = use_rus ? QueryLanguage::Rus : QueryLanguage::Tat;
        q.query_text = fill(tmpl, use_rus ? rec.name_rus : rec.name_tat);
        q.gold_doc_id = rec.id;
        q.toponym_type = rec.toponym_type;
        GeoPoint anchor = rec.coordinates->point;
        if (options.jitter_m > 0.0) {
            const double d = options.jitter_m * std::sqrt(unit(rng));
            const double bearing = 2.0 * std::numbers::pi * unit(rng);
            anchor = displace(anchor, d, bearing);
        }
        q.point = anchor;
        return q;
    };

    EvalQuerySets sets;
    for (std::size_t i = 0; i < n_test; ++i) sets.test.push_back(render(records[eligible[i]]));
    for (std::size_t i = 0; i < n_validation; ++i) sets.validation.push_back(render(records[eligible[n_test + i]]));
    return sets;
}

std::vector<EvalQuery> generate_eval_queries(std::span<const ToponymRecord> records, std::size_t n,
                                             const EvalQueryOptions& options) {
    return generate_eval_query_sets(records, n, 0, options).test;
}

const BootstrapCI& MethodReport::metric(const std::string& name) const {
    for (const auto& m : metrics) {
        if (m.name == name) return m.ci;
    }
    throw NotFound("metric not in report: " + name);
}

const MethodReport& RetrievalReport::method(Method m) const {
    for (const auto& r : methods) {
        if (r.method == m) return r;
    }
    throw NotFound("method not in report: " + std::string(to_string(m)));
}

RetrievalReport compare_methods(const HybridSearcher& searcher, std::span<const EvalQuery> queries,
                                std::span<const Method> methods, const EvalParams& params) {
    if (queries.empty()) throw InvalidArgument("evaluation needs at least one query");
    if (params.k_list.empty()) throw InvalidArgument("k_list must not be empty");
    for (auto k : params.k_list) {
        if (k == 0) throw InvalidArgument("every k in k_list must be at least 1");
    }
    const std::size_t k_max = *std::max_element(params.k_list.begin(), params.k_list.end());

    RetrievalReport report;
    report.params = params;
    report.query_count = queries.size();
    for (Method method : methods) {
        MethodReport mr;
        mr.method = method;
        std::vector<std::vector<double>> recalls(params.k_list.size());
        std::vector<double> rr;
        std::map<std::string, std::pair<std::size_t, double>> by_type;

        for (const auto& eq : queries) {
            SearchQuery q;
            q.text = eq.query_text;
            q.point = eq.point;
            q.radius_m = params.radius_m;
            q.alpha = params.alpha;
            q.k = k_max;
            q.method = method;

            QueryTrace trace{eq.query_text, eq.gold_doc_id, std::nullopt, {}, {}};
            try {
                const auto result = searcher.search(q);
                for (const auto& h : result.hits) trace.returned.push_back(h.doc_id);
                trace.diagnostics = result.diagnostics;
            } catch (const std::exception& e) {
                ++mr.failed_queries;
                trace.diagnostics.emplace_back(e.what());
            }
            trace.gold_rank = rank_of(trace.returned, eq.gold_doc_id);
            for (std::size_t i = 0; i < params.k_list.size(); ++i) {
                recalls[i].push_back(recall_at_k(trace.returned, eq.gold_doc_id, params.k_list[i]));
            }
            rr.push_back(reciprocal_rank(trace.gold_rank));

            const std::string type = eq.toponym_type ? std::string(to_string(*eq.toponym_type)) : "Unspecified";
            auto& slot = by_type[type];
            ++slot.first;
            slot.second += recall_at_k(trace.returned, eq.gold_doc_id, 1);
            mr.trace.push_back(std::move(trace));
        }

        for (std::size_t i = 0; i < params.k_list.size(); ++i) {
            mr.metrics.push_back({"recall@" + std::to_string(params.k_list[i]),
                                  bootstrap_ci(recalls[i], params.resamples, params.seed)});
        }
        mr.metrics.push_back({"mrr", bootstrap_ci(rr, params.resamples, params.seed)});
        for (const auto& [type, slot] : by_type) {
            mr.recall_at_1_by_type.push_back({type, slot.first, slot.second / static_cast<double>(slot.first)});
        }
        report.methods.push_back(std::move(mr));
    }
    return report;
}

std::string report_to_json(const RetrievalReport& report, bool include_trace) {
    ordered_json j;
    ordered_json params;
    params["alpha"] = report.params.alpha;
    params["radius_m"] = report.params.radius_m;
    params["k_list"] = report.params.k_list;
    params["resamples"] = report.params.resamples;
    params["seed"] = report.params.seed;
    j["parameters"] = params;
    j["query_count"] = report.query_count;
    ordered_json methods = ordered_json::array();
    for (const auto& mr : report.methods) {
        ordered_json m;
        m["method"] = to_string(mr.method);
        m["label"] = method_label(mr.method, report.params);
        ordered_json metrics;
        for (const auto& metric : mr.metrics) metrics[metric.name] = ci_json(metric.ci);
        m["metrics"] = metrics;
        ordered_json types = ordered_json::array();
        for (const auto& t : mr.recall_at_1_by_type) {
            types.push_back(ordered_json{{"toponym_type", t.toponym_type}, {"queries", t.queries}, {"recall@1", t.recall_at_1}});
        }
        m["recall@1_by_toponym_type"] = types;
        m["failed_queries"] = mr.failed_queries;
        if (include_trace) {
            ordered_json trace = ordered_json::array();
            for (const auto& t : mr.trace) {
                ordered_json row;
                row["query"] = t.query_text;
                row["gold_doc_id"] = t.gold_doc_id;
                row["gold_rank"] = t.gold_rank ? ordered_json(*t.gold_rank) : ordered_json(nullptr);
                row["returned"] = t.returned;
                row["diagnostics"] = t.diagnostics;
                trace.push_back(std::move(row));
            }
            m["trace"] = trace;
        }
        methods.push_back(std::move(m));
    }
    j["methods"] = methods;
    return j.dump(2);
}

std::string report_to_table(const RetrievalReport& report) {
    std::vector<std::string> header{"Method"};
    for (auto k : report.params.k_list) header.push_back("Recall@" + std::to_string(k));
    header.emplace_back("MRR");

    std::vector<std::vector<std::string>> rows{header};
    for (const auto& mr : report.methods) {
        std::vector<std::string> row{method_label(mr.method, report.params)};
        for (const auto& metric : mr.metrics) {
            row.push_back(fmt3(metric.ci.point_estimate) + " [" + fmt3(metric.ci.lower_95) + ", " +
                          fmt3(metric.ci.upper_95) + "]");
        }
        rows.push_back(std::move(row));
    }
    std::vector<std::size_t> width(header.size(), 0);
    for (const auto& row : rows) {
        for (std::size_t c = 0; c < row.size(); ++c) width[c] = std::max(width[c], row[c].size());
    }
    std::ostringstream out;
    for (std::size_t r = 0; r < rows.size(); ++r) {
        for (std::size_t c = 0; c < rows[r].size(); ++c) {
            if (c > 0) out << " | ";
            out << rows[r][c] << std::string(width[c] - rows[r][c].size(), ' ');
        }
        out << '\n';
        if (r == 0) {
            for (std::size_t c = 0; c < width.size(); ++c) out << (c > 0 ? "-+-" : "") << std::string(width[c], '-');
            out << '\n';
        }
    }
    out << "Recall@1 by toponym type:\n";
    for (const auto& mr : report.methods) {
        for (const auto& t : mr.recall_at_1_by_type) {
            out << "  " << method_label(mr.method, report.params) << " / " << t.toponym_type << ": " << fmt3(t.recall_at_1)
                << " (" << t.queries << " queries)\n";
        }
    }
    return out.str();
}

std::vector<LabeledQuery> to_labeled(std::span<const EvalQuery> queries) {
    std::vector<LabeledQuery> out;
    out.reserve(queries.size());
    for (const auto& eq : queries) {
        SearchQuery q;
        q.text = eq.query_text;
        q.point = eq.point;
        out.push_back({std::move(q), eq.gold_doc_id});
    }
    return out;
}

} // namespace toposearch
