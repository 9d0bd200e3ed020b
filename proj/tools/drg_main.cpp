// SPDX-License-Identifier: Apache-2.0

// drg: DRG catalog dissection, description harmonization, cohort
// preprocessing, classifier training and the evaluation protocol,
// wired together as file-to-file subcommands with reproducible seeds.

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "drgkit/catalog.hpp"
#include "drgkit/csv.hpp"
#include "drgkit/errors.hpp"
#include "drgkit/harmonize.hpp"
#include "drgkit/metrics.hpp"
#include "drgkit/model.hpp"
#include "drgkit/preprocess.hpp"

using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitIo = 2;

bool g_quiet = false;

void say(const std::string& line) {
    if (!g_quiet) std::cout << line << "\n";
}

std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw drg::IoError("cannot open " + path.string());
    std::stringstream buffer;
    buffer << in.rdbuf();
    if (in.bad()) throw drg::IoError("failed reading " + path.string());
    return buffer.str();
}

void write_text_file(const std::filesystem::path& path, const std::string& contents) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw drg::IoError("cannot open " + path.string() + " for writing");
    out << contents;
    if (!out) throw drg::IoError("failed writing " + path.string());
}

drg::DrgCatalog load_catalog(const std::filesystem::path& path, const std::string& version_tag = "") {
    return drg::DrgCatalog::parse(read_text_file(path), version_tag);
}

json parse_json_line(const std::string& line, std::size_t line_no) {
    try {
        return json::parse(line);
    } catch (const json::parse_error& e) {
        throw drg::ParseError(std::string("bad JSON record: ") + e.what(), line_no);
    }
}

struct NoteRecord {
    std::string stay_id;
    std::string text;
    std::string drg_description;
};

std::vector<NoteRecord> read_notes_jsonl(const std::filesystem::path& path) {
    std::string contents = read_text_file(path);
    std::vector<NoteRecord> notes;
    std::istringstream stream(contents);
    std::string line;
    std::size_t line_no = 0;
    std::set<std::string> seen_ids;
    while (std::getline(stream, line)) {
        ++line_no;
        if (line.empty()) continue;
        json j = parse_json_line(line, line_no);
        NoteRecord note;
        note.stay_id = j.at("stay_id").get<std::string>();
        note.text = j.at("text").get<std::string>();
        note.drg_description = j.value("drg_description", "");
        if (!seen_ids.insert(note.stay_id).second)
            throw drg::ValidationError("duplicate stay_id '" + note.stay_id + "' in " + path.string());
        notes.push_back(std::move(note));
    }
    return notes;
}

struct CohortRecord {
    drg::StayRecord record;
    std::string split; // "train" or "test"
};

std::vector<CohortRecord> read_cohort_jsonl(const std::filesystem::path& path) {
    std::string contents = read_text_file(path);
    std::vector<CohortRecord> records;
    std::istringstream stream(contents);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(stream, line)) {
        ++line_no;
        if (line.empty()) continue;
        json j = parse_json_line(line, line_no);
        CohortRecord record;
        record.record.stay_id = j.at("stay_id").get<std::string>();
        record.record.course_text = j.at("course_text").get<std::string>();
        record.record.drg_code = j.at("drg_code").get<int>();
        record.record.word_count = drg::count_words(record.record.course_text);
        record.split = j.at("split").get<std::string>();
        if (record.split != "train" && record.split != "test")
            throw drg::ValidationError("split must be 'train' or 'test' at line " +
                                       std::to_string(line_no));
        records.push_back(std::move(record));
    }
    return records;
}

drg::CohortSplit to_cohort_split(const std::vector<CohortRecord>& records) {
    drg::CohortSplit split;
    for (const auto& record : records) {
        (record.split == "train" ? split.train : split.test).push_back(record.record);
    }
    return split;
}

json split_counts_json(const drg::DrgCatalog& catalog) {
    auto counts = catalog.split_counts();
    return json{{"three_way", counts[0]},
                {"two_way_ccmcc_vs_none", counts[1]},
                {"two_way_mcc_vs_rest", counts[2]},
                {"no_split", counts[3]}};
}

json report_to_json(const drg::MetricsReport& report) {
    json bootstrap = json::object();
    for (const auto& [name, stat] : report.bootstrap)
        bootstrap[name] = json{{"mean", stat.mean}, {"sd", stat.sd}};
    return json{{"acc1", report.acc1},
                {"acc5", report.acc5},
                {"acc10", report.acc10},
                {"macro_f1", report.macro_f1},
                {"micro_f1", report.micro_f1},
                {"macro_auc", report.macro_auc},
                {"micro_auc", report.micro_auc},
                {"bootstrap", std::move(bootstrap)},
                {"n", report.n},
                {"subset", report.subset},
                {"meta",
                 {{"coverage_pct", report.coverage_pct},
                  {"macro_f1_truth_classes", report.macro_f1_truth_classes}}}};
}

// dense class row for a code over the sorted catalog code list
int code_index(const std::vector<int>& codes, int code, const char* what) {
    auto it = std::lower_bound(codes.begin(), codes.end(), code);
    if (it == codes.end() || *it != code)
        throw drg::ValidationError(std::string(what) + " code " + std::to_string(code) +
                                   " is not in the catalog");
    return static_cast<int>(it - codes.begin());
}

std::vector<int> sorted_codes(const drg::DrgCatalog& catalog) {
    std::vector<int> codes;
    codes.reserve(catalog.size());
    for (const auto& entry : catalog.entries()) codes.push_back(entry.code.code);
    std::sort(codes.begin(), codes.end());
    return codes;
}

// ---------------------------------------------------------------- commands

int cmd_build_catalog(const std::string& catalog_path, const std::string& out_path,
                      const std::string& version_tag) {
    drg::DrgCatalog catalog = load_catalog(catalog_path, version_tag);
    if (catalog.empty()) throw drg::ValidationError("catalog file has no entries");

    json entries = json::array();
    for (const auto& entry : catalog.entries()) {
        entries.push_back(json{{"code", entry.code.code},
                               {"description", entry.code.description},
                               {"base_id", entry.base_id},
                               {"arm", drg::arm_name(entry.arm)}});
    }
    json bases = json::array();
    for (const auto& base : catalog.bases()) {
        json members = json::object();
        for (const auto& [arm, code] : base.members) members[std::string(drg::arm_name(arm))] = code;
        bases.push_back(json{{"base_id", base.base_id},
                             {"base_text", base.base_text},
                             {"split", drg::split_name(base.split)},
                             {"members", std::move(members)}});
    }
    json dump{{"version_tag", version_tag},
              {"n_codes", catalog.size()},
              {"n_bases", catalog.bases().size()},
              {"split_counts", split_counts_json(catalog)},
              {"fingerprint", catalog.fingerprint()},
              {"entries", std::move(entries)},
              {"bases", std::move(bases)}};
    write_text_file(out_path, dump.dump(2) + "\n");

    say(json{{"codes", catalog.size()},
             {"bases", catalog.bases().size()},
             {"splits", split_counts_json(catalog)}}
            .dump());
    return kExitOk;
}

int cmd_harmonize(const std::string& notes_path, const std::string& catalog_path,
                  const std::string& rules_path, double accept, double review,
                  const std::string& queue_path, const std::string& mapping_path) {
    drg::DrgCatalog catalog = load_catalog(catalog_path);
    drg::NormalizationRuleSet rules = rules_path.empty()
        ? drg::NormalizationRuleSet::defaults()
        : drg::NormalizationRuleSet::from_csv(read_text_file(rules_path));
    drg::Harmonizer harmonizer(catalog, rules, accept, review);

    std::vector<std::string> unique_descriptions;
    std::set<std::string> seen;
    for (const auto& note : read_notes_jsonl(notes_path)) {
        if (note.drg_description.empty()) continue;
        if (seen.insert(note.drg_description).second)
            unique_descriptions.push_back(note.drg_description);
    }

    std::vector<std::pair<std::string, drg::MappingValue>> mapping;
    std::vector<drg::ReviewQueueItem> queue;
    for (const auto& description : unique_descriptions) {
        drg::HarmonizationOutcome outcome = harmonizer.harmonize(description);
        if (outcome.kind == drg::HarmonizationOutcome::Kind::Matched) {
            mapping.push_back({description, {false, outcome.code}});
        } else {
            queue.push_back({description, outcome.candidates});
        }
    }

    write_text_file(mapping_path, drg::write_mapping_csv(mapping));
    write_text_file(queue_path, drg::write_review_queue_csv(queue));
    say(json{{"descriptions", unique_descriptions.size()},
             {"matched", mapping.size()},
             {"needs_review", queue.size()}}
            .dump());
    return kExitOk;
}

int cmd_apply_reviews(const std::string& queue_path, const std::string& decisions_path,
                      const std::string& catalog_path, const std::string& base_mapping_path,
                      const std::string& out_path) {
    drg::DrgCatalog catalog = load_catalog(catalog_path);
    auto queue = drg::read_review_queue_csv(read_text_file(queue_path));
    auto decisions = drg::read_decisions_csv(read_text_file(decisions_path));
    auto resolved = drg::apply_review_decisions(queue, decisions, catalog);

    std::vector<std::pair<std::string, drg::MappingValue>> merged;
    std::set<std::string> emitted;
    if (!base_mapping_path.empty()) {
        for (const auto& decision : drg::read_decisions_csv(read_text_file(base_mapping_path))) {
            merged.push_back({decision.historical_description,
                              drg::MappingValue{decision.exclude, decision.code}});
            emitted.insert(decision.historical_description);
        }
    }
    for (const auto& item : queue) {
        if (emitted.contains(item.historical_description))
            throw drg::ValidationError("'" + item.historical_description +
                                       "' appears in both the mapping and the queue");
        merged.push_back({item.historical_description, resolved.at(item.historical_description)});
    }
    write_text_file(out_path, drg::write_mapping_csv(merged));

    std::size_t excluded = 0;
    for (const auto& [description, value] : merged)
        if (value.exclude) ++excluded;
    say(json{{"mappings", merged.size()}, {"excluded", excluded}}.dump());
    return kExitOk;
}

int cmd_preprocess(const std::string& notes_path, const std::string& mapping_path,
                   const std::string& catalog_path, const std::string& cohort_path,
                   const std::string& drop_report_path, const std::string& stats_path,
                   std::uint64_t seed, double test_fraction, int min_words, int min_count) {
    drg::DrgCatalog catalog = load_catalog(catalog_path);

    std::map<std::string, drg::MappingValue> mapping;
    if (!mapping_path.empty()) {
        for (const auto& decision : drg::read_decisions_csv(read_text_file(mapping_path))) {
            if (!decision.exclude && !catalog.find_code(decision.code))
                throw drg::ValidationError("mapping assigns unknown code " +
                                           std::to_string(decision.code));
            mapping[decision.historical_description] = {decision.exclude, decision.code};
        }
    }

    auto resolve = [&](const std::string& description) -> std::optional<int> {
        if (const drg::CatalogEntry* entry = catalog.find_description(description))
            return entry->code.code;
        auto it = mapping.find(description);
        if (it == mapping.end() || it->second.exclude) return std::nullopt;
        return it->second.code;
    };

    std::vector<drg::CandidateRecord> candidates;
    drg::DropReport drops;
    for (const auto& note : read_notes_jsonl(notes_path)) {
        auto course = drg::extract_brief_hospital_course(note.text);
        if (!course) {
            drops.counts["missing_section"] += 1;
            continue;
        }
        candidates.push_back({note.stay_id, *course, resolve(note.drg_description)});
    }

    auto [kept, filter_drops] = drg::filter_cohort(candidates, min_words);
    for (const auto& [reason, count] : filter_drops.counts) drops.counts[reason] += count;

    std::vector<drg::StayRecord> frequent = drg::drop_rare_drgs(kept, min_count);
    if (frequent.size() < kept.size())
        drops.counts["rare_drg"] += kept.size() - frequent.size();

    if (frequent.empty()) {
        std::cerr << "warning: no records survived preprocessing\n";
    }

    drg::CohortSplit split;
    split.seed = seed;
    if (!frequent.empty()) split = drg::stratified_split(frequent, test_fraction, seed);

    std::string jsonl;
    auto append = [&jsonl](const drg::StayRecord& record, const char* which) {
        jsonl += json{{"stay_id", record.stay_id},
                      {"course_text", record.course_text},
                      {"drg_code", record.drg_code},
                      {"split", which}}
                     .dump();
        jsonl += '\n';
    };
    for (const auto& record : split.train) append(record, "train");
    for (const auto& record : split.test) append(record, "test");
    write_text_file(cohort_path, jsonl);

    json drop_json = json::object();
    for (const auto& [reason, count] : drops.counts) drop_json[reason] = count;
    if (!drop_report_path.empty()) write_text_file(drop_report_path, drop_json.dump(2) + "\n");

    drg::CohortStats train_stats = drg::cohort_stats(split.train);
    drg::CohortStats test_stats = drg::cohort_stats(split.test);
    drg::CohortStats overall = drg::cohort_stats(frequent);
    json stats{{"n_train", split.train.size()},
               {"n_test", split.test.size()},
               {"unique_train_labels", train_stats.n_classes},
               {"unique_test_labels", test_stats.n_classes},
               {"median_train_cases_per_class", train_stats.median_cases_per_class},
               {"mean_word_count", overall.mean_word_count},
               {"seed", seed}};
    if (!stats_path.empty()) write_text_file(stats_path, stats.dump(2) + "\n");

    say(json{{"kept", frequent.size()}, {"dropped", drop_json}, {"stats", stats}}.dump());
    return kExitOk;
}

drg::HeadMode parse_mode(const std::string& mode) {
    if (mode == "single") return drg::HeadMode::Single;
    if (mode == "two_label") return drg::HeadMode::TwoLabel;
    throw drg::ValidationError("mode must be 'single' or 'two_label'");
}

int cmd_train(const std::string& cohort_path, const std::string& catalog_path,
              const std::string& mode_name, const std::string& out_path,
              const drg::TrainConfig& config, const std::string& init_from_path) {
    drg::DrgCatalog catalog = load_catalog(catalog_path);
    drg::CohortSplit cohort = to_cohort_split(read_cohort_jsonl(cohort_path));

    std::optional<drg::ModelArtifact> init;
    if (!init_from_path.empty()) init = drg::ModelArtifact::load(init_from_path);

    drg::ModelArtifact artifact = drg::train(cohort, catalog, parse_mode(mode_name), config,
                                             init ? &*init : nullptr);
    artifact.save(out_path);
    say(json{{"mode", mode_name},
             {"train_records", cohort.train.size()},
             {"vocab", artifact.vocab.size()},
             {"classes", artifact.head.n_classes}}
            .dump());
    return kExitOk;
}

int cmd_predict(const std::string& artifact_path, const std::string& cohort_path,
                const std::string& catalog_path, const std::string& out_path,
                const std::string& which_split) {
    drg::ModelArtifact artifact = drg::ModelArtifact::load(artifact_path);
    auto records = read_cohort_jsonl(cohort_path);

    std::string jsonl;
    std::size_t n = 0;
    if (artifact.mode == drg::HeadMode::Single) {
        for (const auto& record : records) {
            if (which_split != "all" && record.split != which_split) continue;
            auto ranking = drg::predict_single(artifact, record.record.course_text);
            json topk = json::array();
            for (const auto& scored : ranking)
                topk.push_back(json{{"code", scored.code}, {"prob", scored.prob}});
            jsonl += json{{"stay_id", record.record.stay_id}, {"topk", std::move(topk)}}.dump();
            jsonl += '\n';
            ++n;
        }
    } else {
        if (catalog_path.empty())
            throw drg::ValidationError("two-label prediction requires --catalog");
        drg::DrgCatalog catalog = load_catalog(catalog_path);
        for (const auto& record : records) {
            if (which_split != "all" && record.split != which_split) continue;
            auto prediction = drg::predict_two_label(artifact, record.record.course_text, catalog);
            json base_topk = json::array();
            for (const auto& [base_id, prob] : prediction.base_ranking)
                base_topk.push_back(json{{"base_id", base_id}, {"prob", prob}});
            json cc_probs = json::array();
            for (double p : prediction.cc_probs) cc_probs.push_back(p);
            jsonl += json{{"stay_id", record.record.stay_id},
                          {"base_topk", std::move(base_topk)},
                          {"cc_probs", std::move(cc_probs)},
                          {"cc", drg::label_name(prediction.cc_restricted)},
                          {"composed_code", prediction.composed_code}}
                         .dump();
            jsonl += '\n';
            ++n;
        }
    }
    write_text_file(out_path, jsonl);
    say(json{{"predicted", n}}.dump());
    return kExitOk;
}

struct JoinedPredictions {
    std::vector<drg::PredictionSet> single;
    std::vector<drg::PredictionSet> base;
    std::vector<drg::PredictionSet> cc;
    std::vector<bool> composed_correct;
    bool two_label = false;
};

JoinedPredictions join_predictions(const std::string& preds_path,
                                   const std::vector<CohortRecord>& records,
                                   const drg::DrgCatalog& catalog,
                                   const std::vector<int>& codes) {
    std::map<std::string, const CohortRecord*> by_stay;
    for (const auto& record : records) by_stay[record.record.stay_id] = &record;

    JoinedPredictions joined;
    std::istringstream stream(read_text_file(preds_path));
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(stream, line)) {
        ++line_no;
        if (line.empty()) continue;
        json j = parse_json_line(line, line_no);
        std::string stay_id = j.at("stay_id").get<std::string>();
        auto it = by_stay.find(stay_id);
        if (it == by_stay.end())
            throw drg::ValidationError("prediction for unknown stay '" + stay_id + "'");
        const drg::StayRecord& truth_record = it->second->record;
        const drg::CatalogEntry* entry = catalog.find_code(truth_record.drg_code);
        if (!entry)
            throw drg::ValidationError("cohort code " + std::to_string(truth_record.drg_code) +
                                       " missing from catalog");

        if (j.contains("topk")) {
            drg::PredictionSet pred;
            pred.id = stay_id;
            pred.truth = code_index(codes, truth_record.drg_code, "truth");
            pred.probs.assign(codes.size(), 0.0);
            for (const auto& item : j.at("topk")) {
                int idx = code_index(codes, item.at("code").get<int>(), "predicted");
                pred.ranking.push_back(idx);
                pred.probs[static_cast<std::size_t>(idx)] = item.at("prob").get<double>();
            }
            if (pred.ranking.size() != codes.size())
                throw drg::ValidationError("prediction for '" + stay_id +
                                           "' does not rank every catalog code");
            joined.single.push_back(std::move(pred));
        } else {
            joined.two_label = true;
            drg::PredictionSet base;
            base.id = stay_id;
            base.truth = entry->base_id;
            base.probs.assign(catalog.bases().size(), 0.0);
            for (const auto& item : j.at("base_topk")) {
                int base_id = item.at("base_id").get<int>();
                if (!catalog.find_base(base_id))
                    throw drg::ValidationError("unknown base id in predictions");
                base.ranking.push_back(base_id);
                base.probs[static_cast<std::size_t>(base_id)] = item.at("prob").get<double>();
            }
            joined.base.push_back(std::move(base));

            drg::PredictionSet cc;
            cc.id = stay_id;
            cc.truth = static_cast<int>(drg::arm_to_label(entry->arm));
            cc.probs = j.at("cc_probs").get<std::vector<double>>();
            if (cc.probs.size() != drg::kNumCcMccLabels)
                throw drg::ValidationError("cc_probs must have 5 entries");
            std::vector<int> order(cc.probs.size());
            for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
            std::sort(order.begin(), order.end(), [&](int l, int r) {
                if (cc.probs[static_cast<std::size_t>(l)] != cc.probs[static_cast<std::size_t>(r)])
                    return cc.probs[static_cast<std::size_t>(l)] > cc.probs[static_cast<std::size_t>(r)];
                return l < r;
            });
            cc.ranking = std::move(order);
            joined.cc.push_back(std::move(cc));

            joined.composed_correct.push_back(j.at("composed_code").get<int>() ==
                                              truth_record.drg_code);
        }
    }
    return joined;
}

// Bernoulli outcomes dressed as two-class predictions so the same
// bootstrap machinery yields the composed-DRG accuracy SD.
std::vector<drg::PredictionSet> as_binary_preds(const std::vector<bool>& correct) {
    std::vector<drg::PredictionSet> preds;
    preds.reserve(correct.size());
    for (bool hit : correct) {
        drg::PredictionSet pred;
        pred.truth = 1;
        pred.ranking = hit ? std::vector<int>{1, 0} : std::vector<int>{0, 1};
        pred.probs = hit ? std::vector<double>{0.0, 1.0} : std::vector<double>{1.0, 0.0};
        preds.push_back(std::move(pred));
    }
    return preds;
}

int cmd_evaluate(const std::string& preds_path, const std::string& cohort_path,
                 const std::string& catalog_path, const std::string& out_path,
                 const std::string& subsets_text, int bootstrap_iterations, std::uint64_t seed) {
    drg::DrgCatalog catalog = load_catalog(catalog_path);
    auto records = read_cohort_jsonl(cohort_path);
    std::vector<int> codes = sorted_codes(catalog);
    JoinedPredictions joined = join_predictions(preds_path, records, catalog, codes);

    std::map<int, std::size_t> train_counts;
    for (const auto& record : records) {
        if (record.split == "train")
            train_counts[code_index(codes, record.record.drg_code, "train")] += 1;
    }

    json out;
    if (!joined.two_label) {
        if (joined.single.empty()) throw drg::ValidationError("no predictions to evaluate");
        int n_classes = static_cast<int>(codes.size());
        drg::ReportOptions options;
        options.bootstrap_iterations = bootstrap_iterations;
        options.seed = seed;
        json reports = json::array();
        reports.push_back(report_to_json(drg::compute_report(joined.single, n_classes, options)));

        if (!subsets_text.empty()) {
            std::istringstream subset_stream(subsets_text);
            std::string item;
            while (std::getline(subset_stream, item, ',')) {
                std::size_t requested = static_cast<std::size_t>(std::stoul(item));
                std::size_t effective = std::min<std::size_t>(requested, codes.size());
                drg::MetricsReport report = drg::subset_eval(
                    joined.single, train_counts, effective, n_classes, bootstrap_iterations, seed);
                json block = report_to_json(report);
                block["subset"] = "top" + item;
                block["meta"]["subset_effective"] = effective;
                reports.push_back(std::move(block));
            }
        }
        out = json{{"mode", "single"}, {"reports", std::move(reports)}};
    } else {
        if (joined.base.empty()) throw drg::ValidationError("no predictions to evaluate");
        drg::ReportOptions options;
        options.bootstrap_iterations = bootstrap_iterations;
        options.seed = seed;
        options.subset = "base_drg";
        json base_block = report_to_json(
            drg::compute_report(joined.base, static_cast<int>(catalog.bases().size()), options));
        options.subset = "cc_mcc";
        json cc_block =
            report_to_json(drg::compute_report(joined.cc, drg::kNumCcMccLabels, options));

        auto composed = as_binary_preds(joined.composed_correct);
        double drg_acc1 = drg::top_k_accuracy(composed, 1);
        json drg_block{{"acc1", drg_acc1}, {"n", composed.size()}};
        if (bootstrap_iterations > 0) {
            drg::BootstrapStat stat = drg::bootstrap(
                [](std::span<const drg::PredictionSet> p) { return drg::top_k_accuracy(p, 1); },
                composed, bootstrap_iterations, seed);
            drg_block["bootstrap"] = json{{"acc1", {{"mean", stat.mean}, {"sd", stat.sd}}}};
        }
        out = json{{"mode", "two_label"},
                   {"base", std::move(base_block)},
                   {"cc", std::move(cc_block)},
                   {"drg", std::move(drg_block)}};
    }
    write_text_file(out_path, out.dump(2) + "\n");
    say(out.dump());
    return kExitOk;
}

int cmd_report(const std::string& preds_path, const std::string& cohort_path,
               const std::string& catalog_path, const std::string& per_drg_path,
               const std::string& summary_path) {
    drg::DrgCatalog catalog = load_catalog(catalog_path);
    auto records = read_cohort_jsonl(cohort_path);
    std::vector<int> codes = sorted_codes(catalog);
    JoinedPredictions joined = join_predictions(preds_path, records, catalog, codes);
    if (joined.two_label)
        throw drg::ValidationError("per-DRG reporting expects single-label predictions");

    std::map<int, std::size_t> train_counts;
    drg::CohortSplit split = to_cohort_split(records);
    for (const auto& record : split.train)
        train_counts[code_index(codes, record.drg_code, "train")] += 1;

    drg::PerDrgReport report = drg::per_drg_report(joined.single, train_counts, codes);

    std::string csv = "code,n_train,n_test,acc1,acc5,rank\n";
    for (const auto& row : report.rows) {
        char acc1_buf[32];
        char acc5_buf[32];
        std::snprintf(acc1_buf, sizeof acc1_buf, "%.6f", row.acc1);
        std::snprintf(acc5_buf, sizeof acc5_buf, "%.6f", row.acc5);
        csv += drg::csv::write_row({std::to_string(row.code), std::to_string(row.n_train),
                                    std::to_string(row.n_test), acc1_buf, acc5_buf,
                                    std::to_string(row.rank)});
        csv += '\n';
    }
    write_text_file(per_drg_path, csv);

    drg::CohortStats train_stats = drg::cohort_stats(split.train);
    drg::CohortStats test_stats = drg::cohort_stats(split.test);
    json bins = json::array();
    for (const auto& bin : report.bins) {
        bins.push_back(json{{"acc5_range", bin.range},
                            {"n_classes", bin.n_classes},
                            {"median_train", bin.median_train},
                            {"q1_train", bin.q1_train},
                            {"q3_train", bin.q3_train}});
    }
    json summary{{"accuracy_bins", std::move(bins)},
                 {"median_train_cases_per_class", train_stats.median_cases_per_class},
                 {"unique_train_labels", train_stats.n_classes},
                 {"unique_test_labels", test_stats.n_classes},
                 {"n_train", split.train.size()},
                 {"n_test", split.test.size()}};
    if (!summary_path.empty()) write_text_file(summary_path, summary.dump(2) + "\n");

    say(json{{"classes", report.rows.size()}}.dump());
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"DRG catalog, harmonization and prediction toolkit"};
    app.require_subcommand(1);
    app.set_config("--config")->description("configuration file (INI/TOML; flags win)");
    app.add_flag("--quiet", g_quiet, "suppress stdout summaries");

    // build-catalog
    auto* build = app.add_subcommand("build-catalog", "parse and dissect a DRG definition table");
    std::string catalog_path, out_path, version_tag;
    build->add_option("--catalog", catalog_path, "catalog CSV (code,description)")->required();
    build->add_option("--out", out_path, "catalog dump JSON")->required();
    build->add_option("--version-tag", version_tag, "version tag recorded on every code");

    // harmonize
    auto* harmonize = app.add_subcommand("harmonize", "map historical descriptions onto the catalog");
    std::string notes_path, rules_path, queue_path, mapping_path;
    double accept_threshold = 0.95;
    double review_threshold = 0.70;
    harmonize->add_option("--notes", notes_path, "notes JSONL")->required();
    harmonize->add_option("--catalog", catalog_path, "catalog CSV")->required();
    harmonize->add_option("--rules", rules_path, "extra normalization rules CSV");
    harmonize->add_option("--accept", accept_threshold, "auto-accept threshold");
    harmonize->add_option("--review", review_threshold, "review-band threshold");
    harmonize->add_option("--queue", queue_path, "review queue CSV out")->required();
    harmonize->add_option("--mapping", mapping_path, "auto-mapping CSV out")->required();

    // apply-reviews
    auto* reviews = app.add_subcommand("apply-reviews", "fold review decisions into the mapping");
    std::string decisions_path, base_mapping_path, final_mapping_path;
    reviews->add_option("--queue", queue_path, "review queue CSV")->required();
    reviews->add_option("--decisions", decisions_path, "decisions CSV")->required();
    reviews->add_option("--catalog", catalog_path, "catalog CSV")->required();
    reviews->add_option("--mapping", base_mapping_path, "auto-mapping CSV to merge");
    reviews->add_option("--out", final_mapping_path, "final mapping CSV")->required();

    // preprocess
    auto* preprocess = app.add_subcommand("preprocess", "extract, filter and split the cohort");
    std::string cohort_path, drop_report_path, stats_path;
    std::uint64_t seed = 0;
    double test_fraction = 0.10;
    int min_words = 40;
    int min_count = 2;
    preprocess->add_option("--notes", notes_path, "notes JSONL")->required();
    preprocess->add_option("--mapping", mapping_path, "description mapping CSV");
    preprocess->add_option("--catalog", catalog_path, "catalog CSV")->required();
    preprocess->add_option("--out", cohort_path, "cohort JSONL out")->required();
    preprocess->add_option("--drop-report", drop_report_path, "drop report JSON out");
    preprocess->add_option("--stats", stats_path, "cohort stats JSON out");
    preprocess->add_option("--seed", seed, "split seed");
    preprocess->add_option("--test-fraction", test_fraction, "held-out fraction");
    preprocess->add_option("--min-words", min_words, "course length floor");
    preprocess->add_option("--min-count", min_count, "rare-DRG floor");

    // train
    auto* train_cmd = app.add_subcommand("train", "fit a classifier on the cohort");
    std::string mode_name = "single";
    std::string artifact_path, init_from_path, preset;
    drg::TrainConfig train_config;
    train_cmd->add_option("--cohort", cohort_path, "cohort JSONL")->required();
    train_cmd->add_option("--catalog", catalog_path, "catalog CSV")->required();
    train_cmd->add_option("--mode", mode_name, "single | two_label");
    train_cmd->add_option("--out", artifact_path, "artifact JSON out")->required();
    train_cmd->add_option("--preset", preset, "named preset: paper");
    auto* lr_opt = train_cmd->add_option("--lr", train_config.learning_rate, "learning rate");
    auto* wd_opt = train_cmd->add_option("--weight-decay", train_config.weight_decay, "decoupled weight decay");
    auto* epochs_opt = train_cmd->add_option("--epochs", train_config.epochs, "training epochs");
    auto* batch_opt = train_cmd->add_option("--batch-size", train_config.batch_size, "mini-batch size");
    auto* lambda_opt = train_cmd->add_option("--lambda-cc", train_config.lambda_cc, "CC/MCC loss weight");
    train_cmd->add_option("--seed", train_config.seed, "training seed");
    train_cmd->add_option("--min-df", train_config.min_df, "vocabulary document-frequency floor");
    train_cmd->add_flag("--adapter", train_config.use_adapter,
                        "train a low-rank adapter over a frozen head");
    auto* rank_opt = train_cmd->add_option("--lora-rank", train_config.lora_rank, "adapter rank");
    auto* alpha_opt = train_cmd->add_option("--lora-alpha", train_config.lora_alpha, "adapter alpha");
    auto* dropout_opt =
        train_cmd->add_option("--lora-dropout", train_config.lora_dropout, "adapter input dropout");
    train_cmd->add_option("--init-from", init_from_path, "artifact to start from");

    // predict
    auto* predict = app.add_subcommand("predict", "rank codes for cohort records");
    std::string preds_path;
    std::string which_split = "test";
    predict->add_option("--artifact", artifact_path, "artifact JSON")->required();
    predict->add_option("--cohort", cohort_path, "cohort JSONL")->required();
    predict->add_option("--catalog", catalog_path, "catalog CSV (two-label mode)");
    predict->add_option("--out", preds_path, "predictions JSONL out")->required();
    predict->add_option("--split", which_split, "train | test | all");

    // evaluate
    auto* evaluate = app.add_subcommand("evaluate", "score predictions against the cohort");
    std::string report_path, subsets_text;
    int bootstrap_iterations = 30;
    evaluate->add_option("--preds", preds_path, "predictions JSONL")->required();
    evaluate->add_option("--cohort", cohort_path, "cohort JSONL")->required();
    evaluate->add_option("--catalog", catalog_path, "catalog CSV")->required();
    evaluate->add_option("--out", report_path, "report JSON out")->required();
    evaluate->add_option("--subsets", subsets_text, "comma list of top-N class subsets");
    evaluate->add_option("--bootstrap", bootstrap_iterations, "bootstrap iterations (0 disables)");
    evaluate->add_option("--seed", seed, "bootstrap seed");

    // report
    auto* report_cmd = app.add_subcommand("report", "per-DRG accuracy analytics");
    std::string per_drg_path, summary_path;
    report_cmd->add_option("--preds", preds_path, "predictions JSONL")->required();
    report_cmd->add_option("--cohort", cohort_path, "cohort JSONL")->required();
    report_cmd->add_option("--catalog", catalog_path, "catalog CSV")->required();
    report_cmd->add_option("--per-drg", per_drg_path, "per-DRG CSV out")->required();
    report_cmd->add_option("--summary", summary_path, "group summary JSON out");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitValidation;
    }

    try {
        if (*build) return cmd_build_catalog(catalog_path, out_path, version_tag);
        if (*harmonize)
            return cmd_harmonize(notes_path, catalog_path, rules_path, accept_threshold,
                                 review_threshold, queue_path, mapping_path);
        if (*reviews)
            return cmd_apply_reviews(queue_path, decisions_path, catalog_path, base_mapping_path,
                                     final_mapping_path);
        if (*preprocess)
            return cmd_preprocess(notes_path, mapping_path, catalog_path, cohort_path,
                                  drop_report_path, stats_path, seed, test_fraction, min_words,
                                  min_count);
        if (*train_cmd) {
            if (preset == "paper") {
                drg::TrainConfig paper = drg::TrainConfig::paper_preset();
                // explicit flags win over the preset
                if (!lr_opt->count()) train_config.learning_rate = paper.learning_rate;
                if (!wd_opt->count()) train_config.weight_decay = paper.weight_decay;
                if (!epochs_opt->count()) train_config.epochs = paper.epochs;
                if (!batch_opt->count()) train_config.batch_size = paper.batch_size;
                if (!lambda_opt->count()) train_config.lambda_cc = paper.lambda_cc;
                if (!rank_opt->count()) train_config.lora_rank = paper.lora_rank;
                if (!alpha_opt->count()) train_config.lora_alpha = paper.lora_alpha;
                if (!dropout_opt->count()) train_config.lora_dropout = paper.lora_dropout;
            } else if (!preset.empty()) {
                throw drg::ConfigError("unknown preset '" + preset + "'");
            }
            return cmd_train(cohort_path, catalog_path, mode_name, artifact_path, train_config,
                             init_from_path);
        }
        if (*predict)
            return cmd_predict(artifact_path, cohort_path, catalog_path, preds_path, which_split);
        if (*evaluate)
            return cmd_evaluate(preds_path, cohort_path, catalog_path, report_path, subsets_text,
                                bootstrap_iterations, seed);
        if (*report_cmd)
            return cmd_report(preds_path, cohort_path, catalog_path, per_drg_path, summary_path);
    } catch (const drg::IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitIo;
    } catch (const drg::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const std::exception& e) { // ValidationError, ConfigError, json errors
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    }
    return kExitOk;
}
