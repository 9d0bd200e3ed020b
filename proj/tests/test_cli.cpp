// SPDX-License-Identifier: Apache-2.0

// Drives the installed binary end to end over the bundled fixtures.

#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "drgkit/catalog.hpp"
#include "support/synthetic.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct RunResult {
    int exit_code = -1;
    std::string output; // stdout + stderr
};

fs::path scratch_dir() {
    static fs::path dir = [] {
        fs::path d = fs::temp_directory_path() / "drgkit_cli_test";
        fs::remove_all(d);
        fs::create_directories(d);
        return d;
    }();
    return dir;
}

RunResult run_cli(const std::string& args) {
    fs::path log = scratch_dir() / "cli_output.log";
    std::string command = std::string(DRG_CLI_PATH) + " " + args + " > " + log.string() + " 2>&1";
    int status = std::system(command.c_str());
    RunResult result;
    result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    std::ifstream in(log);
    std::stringstream buffer;
    buffer << in.rdbuf();
    result.output = buffer.str();
    return result;
}

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    std::stringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

void spit(const fs::path& path, const std::string& contents) {
    std::ofstream out(path, std::ios::binary);
    out << contents;
}

fs::path bundled(const char* name) { return fs::path(DRG_DATA_DIR) / name; }

} // namespace

TEST_CASE("build-catalog reports the reference census") {
    fs::path out = scratch_dir() / "catalog_dump.json";
    RunResult result = run_cli("build-catalog --catalog " + bundled("catalog_v34_synthetic.csv").string() +
                               " --out " + out.string());
    REQUIRE(result.exit_code == 0);

    json summary = json::parse(result.output);
    CHECK(summary.at("codes") == 757);
    CHECK(summary.at("bases") == 340);
    CHECK(summary.at("splits").at("three_way") == 154);
    CHECK(summary.at("splits").at("two_way_ccmcc_vs_none") == 44);
    CHECK(summary.at("splits").at("two_way_mcc_vs_rest") == 65);
    CHECK(summary.at("splits").at("no_split") == 77);

    json dump = json::parse(slurp(out));
    CHECK(dump.at("entries").size() == 757);
    CHECK(dump.at("bases").size() == 340);
}

TEST_CASE("build-catalog failure modes") {
    fs::path empty = scratch_dir() / "empty.csv";
    spit(empty, "");
    fs::path out = scratch_dir() / "never.json";
    CHECK(run_cli("build-catalog --catalog " + empty.string() + " --out " + out.string()).exit_code == 1);

    CHECK(run_cli("build-catalog --catalog " + (scratch_dir() / "no_such_file.csv").string() +
                  " --out " + out.string()).exit_code == 2);

    fs::path malformed = scratch_dir() / "malformed.csv";
    spit(malformed, "code,description\nnot_a_code,FOO\n");
    RunResult bad = run_cli("build-catalog --catalog " + malformed.string() + " --out " + out.string());
    CHECK(bad.exit_code == 1);
    CHECK(bad.output.find("line 2") != std::string::npos);
}

TEST_CASE("build-catalog two-row fixture") {
    fs::path two = scratch_dir() / "two.csv";
    spit(two,
         "code,description\n"
         "56,DEGENERATIVE NERVOUS SYSTEM DISORDERS WITH MCC\n"
         "57,DEGENERATIVE NERVOUS SYSTEM DISORDERS WITHOUT MCC\n");
    fs::path out = scratch_dir() / "two_dump.json";
    RunResult result = run_cli("build-catalog --catalog " + two.string() + " --out " + out.string());
    REQUIRE(result.exit_code == 0);
    json dump = json::parse(slurp(out));
    CHECK(dump.at("n_bases") == 1);
    CHECK(dump.at("bases")[0].at("split") == "two_way_mcc_vs_rest");
}

TEST_CASE("pipeline over the bundled sample notes") {
    fs::path catalog = bundled("catalog_v34_synthetic.csv");
    fs::path notes = bundled("sample_notes.jsonl");
    fs::path queue = scratch_dir() / "queue.csv";
    fs::path mapping = scratch_dir() / "mapping.csv";
    fs::path cohort = scratch_dir() / "cohort.jsonl";
    fs::path drops = scratch_dir() / "drops.json";
    fs::path stats = scratch_dir() / "stats.json";

    SUBCASE("harmonize with canonical descriptions leaves an empty queue") {
        RunResult result = run_cli("harmonize --notes " + notes.string() + " --catalog " +
                                   catalog.string() + " --queue " + queue.string() + " --mapping " +
                                   mapping.string());
        REQUIRE(result.exit_code == 0);
        json summary = json::parse(result.output);
        CHECK(summary.at("needs_review") == 0);
        // only the header line remains
        std::string queue_text = slurp(queue);
        CHECK(queue_text.find('\n') == queue_text.size() - 1);

        // rerun produces byte-identical outputs
        std::string mapping_text = slurp(mapping);
        RunResult rerun = run_cli("harmonize --notes " + notes.string() + " --catalog " +
                                  catalog.string() + " --queue " + queue.string() + " --mapping " +
                                  mapping.string());
        REQUIRE(rerun.exit_code == 0);
        CHECK(slurp(queue) == queue_text);
        CHECK(slurp(mapping) == mapping_text);
    }

    SUBCASE("preprocess keeps nine of twelve and is byte-deterministic") {
        RunResult result = run_cli("preprocess --notes " + notes.string() + " --catalog " +
                                   catalog.string() + " --out " + cohort.string() +
                                   " --drop-report " + drops.string() + " --stats " +
                                   stats.string() + " --seed 11");
        REQUIRE(result.exit_code == 0);
        json summary = json::parse(result.output);
        CHECK(summary.at("kept") == 9);
        json drop_json = json::parse(slurp(drops));
        CHECK(drop_json.at("too_short") == 2);
        CHECK(drop_json.at("duplicate") == 1);

        std::string first = slurp(cohort);
        RunResult rerun = run_cli("preprocess --notes " + notes.string() + " --catalog " +
                                  catalog.string() + " --out " + cohort.string() +
                                  " --drop-report " + drops.string() + " --stats " +
                                  stats.string() + " --seed 11");
        REQUIRE(rerun.exit_code == 0);
        CHECK(slurp(cohort) == first); // identical seed, identical bytes
    }
}

TEST_CASE("harmonize emits a queue row for an unmappable historical description") {
    fs::path catalog = bundled("catalog_v34_synthetic.csv");
    fs::path notes = scratch_dir() / "historical_notes.jsonl";
    spit(notes,
         json{{"stay_id", "h1"},
              {"text", "Brief Hospital Course:\nstable course\n"},
              {"drg_description", "URINARY STONES W MCC"}}
                 .dump() +
             "\n");
    fs::path queue = scratch_dir() / "hqueue.csv";
    fs::path mapping = scratch_dir() / "hmapping.csv";

    RunResult result = run_cli("harmonize --notes " + notes.string() + " --catalog " +
                               catalog.string() + " --queue " + queue.string() + " --mapping " +
                               mapping.string());
    REQUIRE(result.exit_code == 0);
    json summary = json::parse(result.output);
    CHECK(summary.at("needs_review") == 1);
    CHECK(slurp(queue).find("URINARY STONES W MCC") != std::string::npos);

    // a decision of EXCLUDE resolves the queue
    fs::path decisions = scratch_dir() / "decisions.csv";
    spit(decisions, "historical_description,decision\nURINARY STONES W MCC,EXCLUDE\n");
    fs::path final_mapping = scratch_dir() / "final_mapping.csv";
    RunResult applied = run_cli("apply-reviews --queue " + queue.string() + " --decisions " +
                                decisions.string() + " --catalog " + catalog.string() +
                                " --mapping " + mapping.string() + " --out " + final_mapping.string());
    REQUIRE(applied.exit_code == 0);
    CHECK(slurp(final_mapping).find("URINARY STONES W MCC,EXCLUDE") != std::string::npos);
}

TEST_CASE("train, predict, evaluate and report on a small synthetic run") {
    synthetic::DeskSpec spec;
    spec.three_way = 4;
    spec.ccmcc_vs_none = 2;
    spec.mcc_vs_rest = 3;
    spec.no_split = 3; // 12 bases, 25 codes
    spec.n_notes = 600;
    spec.n_short = 4;
    spec.n_missing_section = 2;
    spec.n_duplicates = 2;
    spec.noise_vocab = 300;

    fs::path catalog = scratch_dir() / "small_catalog.csv";
    spit(catalog, synthetic::desk_catalog_csv(spec));
    fs::path notes = scratch_dir() / "small_notes.jsonl";
    spit(notes, synthetic::desk_notes_jsonl(spec));
    fs::path cohort = scratch_dir() / "small_cohort.jsonl";
    fs::path artifact = scratch_dir() / "small_model.json";
    fs::path preds = scratch_dir() / "small_preds.jsonl";
    fs::path report = scratch_dir() / "small_report.json";
    fs::path per_drg = scratch_dir() / "small_per_drg.csv";
    fs::path summary = scratch_dir() / "small_summary.json";

    REQUIRE(run_cli("preprocess --notes " + notes.string() + " --catalog " + catalog.string() +
                    " --out " + cohort.string() + " --seed 5").exit_code == 0);
    REQUIRE(run_cli("train --cohort " + cohort.string() + " --catalog " + catalog.string() +
                    " --mode single --out " + artifact.string() + " --seed 5 --epochs 2")
                .exit_code == 0);
    REQUIRE(run_cli("predict --artifact " + artifact.string() + " --cohort " + cohort.string() +
                    " --out " + preds.string()).exit_code == 0);

    RunResult eval = run_cli("evaluate --preds " + preds.string() + " --cohort " + cohort.string() +
                             " --catalog " + catalog.string() + " --out " + report.string() +
                             " --subsets 300,5,3 --bootstrap 30 --seed 2");
    REQUIRE(eval.exit_code == 0);
    json report_json = json::parse(slurp(report));
    CHECK(report_json.at("mode") == "single");
    REQUIRE(report_json.at("reports").size() == 4); // all + three subsets
    const json& all_block = report_json.at("reports")[0];
    for (const char* key : {"acc1", "acc5", "acc10", "macro_f1", "micro_f1", "macro_auc",
                            "micro_auc", "bootstrap", "n", "subset"}) {
        CHECK(all_block.contains(key));
    }
    // top300 exceeds the class count and clamps to the full universe
    CHECK(report_json.at("reports")[1].at("subset") == "top300");
    CHECK(report_json.at("reports")[1].at("n") == all_block.at("n"));

    REQUIRE(run_cli("report --preds " + preds.string() + " --cohort " + cohort.string() +
                    " --catalog " + catalog.string() + " --per-drg " + per_drg.string() +
                    " --summary " + summary.string()).exit_code == 0);
    std::string per_drg_text = slurp(per_drg);
    CHECK(per_drg_text.rfind("code,n_train,n_test,acc1,acc5,rank\n", 0) == 0);
    json summary_json = json::parse(slurp(summary));
    CHECK(summary_json.at("accuracy_bins").size() == 5);

    // two-label pass over the same cohort
    fs::path artifact2 = scratch_dir() / "small_model2.json";
    fs::path preds2 = scratch_dir() / "small_preds2.jsonl";
    fs::path report2 = scratch_dir() / "small_report2.json";
    REQUIRE(run_cli("train --cohort " + cohort.string() + " --catalog " + catalog.string() +
                    " --mode two_label --out " + artifact2.string() + " --seed 5 --epochs 2")
                .exit_code == 0);
    REQUIRE(run_cli("predict --artifact " + artifact2.string() + " --cohort " + cohort.string() +
                    " --catalog " + catalog.string() + " --out " + preds2.string()).exit_code == 0);
    REQUIRE(run_cli("evaluate --preds " + preds2.string() + " --cohort " + cohort.string() +
                    " --catalog " + catalog.string() + " --out " + report2.string()).exit_code == 0);
    json two_label_report = json::parse(slurp(report2));
    CHECK(two_label_report.at("mode") == "two_label");
    CHECK(two_label_report.contains("base"));
    CHECK(two_label_report.contains("cc"));
    CHECK(two_label_report.at("drg").contains("acc1"));

    // predicting single cohort text with the two-label artifact but no catalog fails cleanly
    CHECK(run_cli("predict --artifact " + artifact2.string() + " --cohort " + cohort.string() +
                  " --out " + preds2.string()).exit_code == 1);
}

TEST_CASE("config file supplies defaults and flags win") {
    fs::path catalog = bundled("catalog_v34_synthetic.csv");
    fs::path notes = bundled("sample_notes.jsonl");
    fs::path config = scratch_dir() / "drg.ini";
    fs::path cohort_a = scratch_dir() / "cfg_cohort_a.jsonl";
    fs::path cohort_b = scratch_dir() / "cfg_cohort_b.jsonl";

    spit(config, "[preprocess]\nseed=11\nmin-words=40\n");

    REQUIRE(run_cli("--config " + config.string() + " preprocess --notes " + notes.string() +
                    " --catalog " + catalog.string() + " --out " + cohort_a.string())
                .exit_code == 0);
    REQUIRE(run_cli("preprocess --notes " + notes.string() + " --catalog " + catalog.string() +
                    " --out " + cohort_b.string() + " --seed 11").exit_code == 0);
    CHECK(slurp(cohort_a) == slurp(cohort_b));

    // explicit flag overrides the config value: min-words 1000 drops everything
    RunResult strict = run_cli("--config " + config.string() + " preprocess --notes " +
                               notes.string() + " --catalog " + catalog.string() + " --out " +
                               cohort_a.string() + " --min-words 1000");
    REQUIRE(strict.exit_code == 0);
    CHECK(slurp(cohort_a).empty());
}

TEST_CASE("quiet mode silences summaries") {
    fs::path out = scratch_dir() / "quiet_dump.json";
    RunResult result = run_cli("--quiet build-catalog --catalog " +
                               bundled("catalog_v34_synthetic.csv").string() + " --out " + out.string());
    REQUIRE(result.exit_code == 0);
    CHECK(result.output.empty());
}
