#include "kgrev/evaluation.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

namespace kgrev {

using nlohmann::json;

namespace {

// U statistic accumulated per tie group, walking scores ascending:
// each positive in a group outranks every negative strictly below it
// and half of the negatives tied with it. All partial terms are exact
// integers or half-integers, so the result matches pairwise counting
// bit for bit.
double auc_from_sorted(const std::vector<std::pair<double, int>>& sorted) {
    double pos = 0.0, neg = 0.0;
    for (const auto& [s, y] : sorted) (y ? pos : neg) += 1.0;
    if (pos == 0.0 || neg == 0.0) throw SingleClass("auc needs both classes");

    double u = 0.0, cum_neg = 0.0;
    size_t i = 0;
    while (i < sorted.size()) {
        size_t j = i;
        double group_pos = 0.0, group_neg = 0.0;
        while (j < sorted.size() && sorted[j].first == sorted[i].first) {
            (sorted[j].second ? group_pos : group_neg) += 1.0;
            ++j;
        }
        u += group_pos * (cum_neg + 0.5 * group_neg);
        cum_neg += group_neg;
        i = j;
    }
    return u / (pos * neg);
}

double auc_of_rows(const std::vector<const ScoredRow*>& rows) {
    std::vector<std::pair<double, int>> sorted;
    sorted.reserve(rows.size());
    for (const auto* r : rows) sorted.emplace_back(r->score, r->label);
    std::sort(sorted.begin(), sorted.end());
    return auc_from_sorted(sorted);
}

std::pair<std::vector<const ScoredRow*>, std::vector<const ScoredRow*>> split_groups(
    const ScoredDataset& data, const FairnessGroupSpec& spec) {
    std::pair<std::vector<const ScoredRow*>, std::vector<const ScoredRow*>> out;
    for (const auto& r : data.rows) {
        auto it = r.groups.find(spec.slice);
        if (it == r.groups.end()) continue;
        if (it->second == spec.privileged) out.first.push_back(&r);
        else if (it->second == spec.unprivileged) out.second.push_back(&r);
    }
    return out;
}

double percentile(const std::vector<double>& sorted_values, double p) {
    double rank = p / 100.0 * double(sorted_values.size() - 1);
    size_t lo = size_t(rank);
    if (lo + 1 >= sorted_values.size()) return sorted_values.back();
    double frac = rank - double(lo);
    return sorted_values[lo] * (1.0 - frac) + sorted_values[lo + 1] * frac;
}

std::string double_key(double v) { return json(v).dump(); }

}  // namespace

double auc(const ScoredDataset& data) {
    std::vector<std::pair<double, int>> sorted;
    sorted.reserve(data.rows.size());
    for (const auto& r : data.rows) sorted.emplace_back(r.score, r.label);
    std::sort(sorted.begin(), sorted.end());
    return auc_from_sorted(sorted);
}

std::pair<double, double> bootstrap_ci(const ScoredDataset& data, int n_resamples,
                                       int resample_size, uint64_t seed) {
    const size_t n = data.rows.size();
    if (n == 0) throw EmptyInput("bootstrap needs rows");
    bool any_pos = false, any_neg = false;
    for (const auto& r : data.rows) (r.label ? any_pos : any_neg) = true;
    if (!any_pos || !any_neg) throw SingleClass("bootstrap needs both classes");

    // Rows sorted by score once; every resample reuses this order and
    // only counts multiplicities, so no per-resample sort is needed.
    std::vector<size_t> order(n);
    for (size_t i = 0; i < n; ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
        return data.rows[a].score < data.rows[b].score;
    });
    std::vector<double> sorted_score(n);
    std::vector<int> sorted_label(n);
    std::vector<size_t> slot_of_row(n);
    for (size_t i = 0; i < n; ++i) {
        sorted_score[i] = data.rows[order[i]].score;
        sorted_label[i] = data.rows[order[i]].label;
        slot_of_row[order[i]] = i;
    }

    std::vector<uint32_t> counts(n);
    std::vector<double> aucs;
    aucs.reserve(size_t(n_resamples));
    // Mixing the master seed first keeps the substream sets of nearby
    // seeds disjoint; seed+r alone would alias resample streams.
    const uint64_t stream_base = splitmix64(seed);
    for (int r = 0; r < n_resamples; ++r) {
        std::mt19937_64 rng(splitmix64(stream_base ^ uint64_t(r)));
        std::uniform_int_distribution<size_t> pick(0, n - 1);
        while (true) {
            std::fill(counts.begin(), counts.end(), 0u);
            for (int k = 0; k < resample_size; ++k) counts[slot_of_row[pick(rng)]]++;
            double pos = 0.0, neg = 0.0;
            for (size_t i = 0; i < n; ++i) {
                (sorted_label[i] ? pos : neg) += double(counts[i]);
            }
            if (pos == 0.0 || neg == 0.0) continue;  // single class, redraw

            double u = 0.0, cum_neg = 0.0;
            size_t i = 0;
            while (i < n) {
                size_t j = i;
                double group_pos = 0.0, group_neg = 0.0;
                while (j < n && sorted_score[j] == sorted_score[i]) {
                    (sorted_label[j] ? group_pos : group_neg) += double(counts[j]);
                    ++j;
                }
                u += group_pos * (cum_neg + 0.5 * group_neg);
                cum_neg += group_neg;
                i = j;
            }
            aucs.push_back(u / (pos * neg));
            break;
        }
    }
    std::sort(aucs.begin(), aucs.end());
    return {percentile(aucs, 5.0), percentile(aucs, 95.0)};
}

double filter_rate_at_recall(const ScoredDataset& data, double recall) {
    if (!(recall > 0.0 && recall <= 1.0)) throw InvalidRatio("recall must be in (0, 1]");
    std::vector<std::pair<double, int>> sorted;
    sorted.reserve(data.rows.size());
    for (const auto& r : data.rows) sorted.emplace_back(r.score, r.label);
    std::sort(sorted.begin(), sorted.end());

    double total_pos = 0.0;
    for (const auto& [s, y] : sorted) total_pos += double(y != 0);
    if (total_pos == 0.0) throw NoPositives("filter rate needs at least one positive");

    double needed = recall * total_pos;
    double retained_pos = total_pos;
    size_t removed = 0, i = 0;
    while (i < sorted.size()) {
        size_t j = i;
        double group_pos = 0.0;
        while (j < sorted.size() && sorted[j].first == sorted[i].first) {
            group_pos += double(sorted[j].second != 0);
            ++j;
        }
        if (retained_pos - group_pos + 1e-9 < needed) break;
        retained_pos -= group_pos;
        removed += j - i;
        i = j;
    }
    return double(removed) / double(sorted.size());
}

double disparate_impact_ratio(const ScoredDataset& data, const FairnessGroupSpec& spec) {
    auto [priv, unpriv] = split_groups(data, spec);
    if (priv.empty() || unpriv.empty()) {
        throw EmptyGroup("both groups of slice '" + spec.slice + "' must be non-empty");
    }
    auto flag_rate = [&](const std::vector<const ScoredRow*>& rows) {
        double flagged = 0.0;
        for (const auto* r : rows) flagged += double(r->score >= spec.threshold);
        return flagged / double(rows.size());
    };
    double priv_rate = flag_rate(priv);
    if (priv_rate == 0.0) {
        throw ZeroPrivilegedRate("privileged flag rate is zero for slice '" + spec.slice + "'");
    }
    return flag_rate(unpriv) / priv_rate;
}

double delta_auc(const ScoredDataset& data, const FairnessGroupSpec& spec) {
    auto [priv, unpriv] = split_groups(data, spec);
    try {
        return auc_of_rows(priv) - auc_of_rows(unpriv);
    } catch (const SingleClass&) {
        throw SingleClassInGroup("a group of slice '" + spec.slice +
                                 "' lacks both classes");
    }
}

std::string report_to_json(const EvaluationReport& report) {
    json out;
    out["auc"] = report.auc_value;
    out["auc_ci"] = {report.auc_ci.first, report.auc_ci.second};
    out["n_rows"] = report.n_rows;
    json fr = json::object();
    for (const auto& [recall, rate] : report.fr) fr[double_key(recall)] = rate;
    out["fr"] = std::move(fr);
    out["dir"] = report.dir;
    out["dauc"] = report.dauc;
    out["dauc_convention"] = report.dauc_convention;
    out["per_slice_auc"] = report.per_slice_auc;
    return out.dump(2);
}

EvaluationReport report_from_json(std::string_view text) {
    json in = json::parse(text, nullptr, false);
    if (in.is_discarded() || !in.is_object()) throw IoError("report is not a JSON object");
    EvaluationReport r;
    r.auc_value = in.at("auc").get<double>();
    r.auc_ci = {in.at("auc_ci")[0].get<double>(), in.at("auc_ci")[1].get<double>()};
    r.n_rows = in.value("n_rows", size_t(0));
    for (const auto& [k, v] : in.at("fr").items()) r.fr[std::stod(k)] = v.get<double>();
    r.dir = in.value("dir", std::map<std::string, double>{});
    r.dauc = in.value("dauc", std::map<std::string, double>{});
    r.dauc_convention = in.value("dauc_convention", r.dauc_convention);
    if (in.contains("per_slice_auc")) {
        r.per_slice_auc =
            in["per_slice_auc"].get<std::map<std::string, std::map<std::string, double>>>();
    }
    return r;
}

EvaluationReport sliced_report(const ScoredDataset& data,
                               const std::vector<FairnessGroupSpec>& specs,
                               const std::vector<std::string>& slices,
                               const std::vector<double>& recalls, const BootstrapParams& bootstrap,
                               uint64_t seed) {
    EvaluationReport report;
    report.n_rows = data.rows.size();
    report.auc_value = auc(data);
    report.auc_ci = bootstrap_ci(data, bootstrap.n_resamples, bootstrap.resample_size, seed);
    for (double r : recalls) report.fr[r] = filter_rate_at_recall(data, r);
    for (const auto& spec : specs) {
        // Degenerate slices (an empty group, no flagged privileged rows,
        // a single-class group) leave that entry out instead of failing
        // the whole report, mirroring per_slice_auc.
        try {
            report.dir[spec.slice] = disparate_impact_ratio(data, spec);
        } catch (const EmptyGroup&) {
        } catch (const ZeroPrivilegedRate&) {
        }
        try {
            report.dauc[spec.slice] = delta_auc(data, spec);
        } catch (const SingleClassInGroup&) {
        }
    }
    for (const auto& slice : slices) {
        std::map<std::string, std::vector<const ScoredRow*>> by_value;
        for (const auto& row : data.rows) {
            auto it = row.groups.find(slice);
            if (it != row.groups.end()) by_value[it->second].push_back(&row);
        }
        for (const auto& [value, rows] : by_value) {
            try {
                report.per_slice_auc[slice][value] = auc_of_rows(rows);
            } catch (const SingleClass&) {
                // single-class subset: AUC undefined, entry omitted
            }
        }
    }
    return report;
}

ScoredDataset rule_based_baseline(const std::vector<RevisionRecord>& records) {
    ScoredDataset out;
    out.rows.reserve(records.size());
    for (const auto& r : records) {
        ScoredRow row;
        row.score = r.editor.is_anonymous ? 1.0 : 0.0;
        row.label = r.reverted ? 1 : 0;
        row.groups = standard_groups(r);
        out.rows.push_back(std::move(row));
    }
    return out;
}

std::vector<PrPoint> precision_recall_table(const ScoredDataset& data) {
    std::vector<std::pair<double, int>> sorted;
    sorted.reserve(data.rows.size());
    for (const auto& r : data.rows) sorted.emplace_back(r.score, r.label);
    std::sort(sorted.begin(), sorted.end(), std::greater<>());

    double total_pos = 0.0;
    for (const auto& [s, y] : sorted) total_pos += double(y != 0);

    std::vector<PrPoint> table;
    double tp = 0.0, flagged = 0.0;
    size_t i = 0;
    while (i < sorted.size()) {
        size_t j = i;
        while (j < sorted.size() && sorted[j].first == sorted[i].first) {
            tp += double(sorted[j].second != 0);
            flagged += 1.0;
            ++j;
        }
        table.push_back({sorted[i].first, tp / flagged,
                         total_pos > 0.0 ? tp / total_pos : 0.0});
        i = j;
    }
    return table;
}

ScoredDataset read_scored(const std::string& path) {
    ScoredDataset data;
    for (const auto& line : read_lines(path)) {
        if (line.empty()) continue;
        json j = json::parse(line, nullptr, false);
        if (j.is_discarded() || !j.is_object()) throw IoError("scored line is not a JSON object");
        try {
            ScoredRow row;
            row.score = j.at("score").get<double>();
            row.label = j.at("label").get<int>();
            if (j.contains("groups")) {
                row.groups = j["groups"].get<std::map<std::string, std::string>>();
            }
            data.rows.push_back(std::move(row));
        } catch (const json::exception& e) {
            throw IoError(std::string("bad scored row: ") + e.what());
        }
    }
    return data;
}

void write_scored(const std::string& path, const ScoredDataset& data) {
    std::ostringstream buf;
    for (const auto& r : data.rows) {
        json j;
        j["score"] = r.score;
        j["label"] = r.label;
        j["groups"] = r.groups;
        buf << j.dump() << '\n';
    }
    write_file(path, buf.str());
}

}  // namespace kgrev
