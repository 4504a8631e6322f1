#define DOCTEST_CONFIG_IMPLEMENT
#include <doctest.h>

#include <sys/wait.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "newsprop/graph.hpp"
#include "newsprop/io.hpp"

using namespace newsprop;
using nlohmann::json;

namespace {

std::string g_bin;
std::string g_dir;

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void spit(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    out << content;
}

struct CmdResult {
    int status = -1;
    std::string out;
    std::string err;
};

CmdResult run_cli(const std::string& args) {
    static int counter = 0;
    const std::string out = g_dir + "/stdout." + std::to_string(counter);
    const std::string err = g_dir + "/stderr." + std::to_string(counter);
    ++counter;
    const std::string cmd = g_bin + " " + args + " >" + out + " 2>" + err;
    const int raw = std::system(cmd.c_str());
    CmdResult r;
    r.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
    r.out = slurp(out);
    r.err = slurp(err);
    return r;
}

json stdout_json(const CmdResult& r) {
    CAPTURE(r.out);
    CAPTURE(r.err);
    json j = json::parse(r.out, nullptr, false);
    REQUIRE_FALSE(j.is_discarded());
    return j;
}

std::string error_code(const CmdResult& r) {
    json j = json::parse(r.err, nullptr, false);
    REQUIRE_FALSE(j.is_discarded());
    return j["error"]["code"].get<std::string>();
}

std::string path_of(const std::string& name) { return g_dir + "/" + name; }

std::string gen_small(const std::string& name, const std::string& extra = "") {
    const std::string p = path_of(name);
    const CmdResult r = run_cli("gen --out " + p +
                                " --graphs 10 --min-nodes 5 --max-nodes 9 --feat-dim 4"
                                " --feature-signal 2.0 --seed 31 " + extra);
    REQUIRE(r.status == 0);
    return p;
}

} // namespace

TEST_CASE("help exits zero and lists the subcommands") {
    const CmdResult r = run_cli("--help");
    CHECK(r.status == 0);
    for (const char* name :
         {"gen", "augment", "summarize", "analyze", "train", "eval", "ablate", "gradcheck"})
        CHECK(r.out.find(name) != std::string::npos);
}

TEST_CASE("usage errors exit with code 1") {
    SUBCASE("no subcommand") { CHECK(run_cli("").status == 1); }
    SUBCASE("unknown subcommand") { CHECK(run_cli("frobnicate").status == 1); }
    SUBCASE("unknown flag") { CHECK(run_cli("gen --out x --bogus 1").status == 1); }
    SUBCASE("missing required option") { CHECK(run_cli("gen").status == 1); }
    SUBCASE("model outside the allowed set") {
        const std::string data = gen_small("usage.ndjson");
        const CmdResult r = run_cli("train --data " + data + " --model mlp");
        CHECK(r.status == 1);
        CHECK(error_code(r) == "UsageError");
    }
}

TEST_CASE("gen writes a valid dataset, byte-identical per seed") {
    const std::string a = path_of("gen_a.ndjson");
    const std::string b = path_of("gen_b.ndjson");
    const std::string c = path_of("gen_c.ndjson");

    const CmdResult ra = run_cli("gen --out " + a + " --graphs 4 --seed 7 --name demo");
    REQUIRE(ra.status == 0);
    const json ja = stdout_json(ra);
    CHECK(ja["command"] == "gen");
    CHECK(ja["graphs"] == 8);
    CHECK(ja["feat_dim"] == 16);
    CHECK(ja["seed"] == 7);
    CHECK(ja["name"] == "demo");
    CHECK(ja["out"] == a);

    REQUIRE(run_cli("gen --out " + b + " --graphs 4 --seed 7 --name demo").status == 0);
    REQUIRE(run_cli("gen --out " + c + " --graphs 4 --seed 8 --name demo").status == 0);
    CHECK(slurp(a) == slurp(b));
    CHECK(slurp(a) != slurp(c));

    const GraphDataset ds = load_dataset(a);
    CHECK(ds.graphs.size() == 8);
    CHECK(ds.name == "demo");
    for (const auto& g : ds.graphs) CHECK(validate_graph(g).ok);
}

TEST_CASE("augment appends exactly two columns") {
    const std::string in = gen_small("aug_in.ndjson");
    const std::string out = path_of("aug_out.ndjson");
    const CmdResult r = run_cli("augment --in " + in + " --out " + out);
    REQUIRE(r.status == 0);
    const json j = stdout_json(r);
    CHECK(j["command"] == "augment");
    CHECK(j["feat_dim_in"] == 4);
    CHECK(j["feat_dim_out"] == 6);
    CHECK(load_dataset(out).feat_dim() == 6);
}

TEST_CASE("summarize and analyze chain") {
    const std::string data = gen_small("sum_in.ndjson");
    const std::string csv = path_of("summary.csv");
    const CmdResult rs = run_cli("summarize --in " + data + " --out " + csv);
    REQUIRE(rs.status == 0);
    CHECK(stdout_json(rs)["graphs"] == 20);
    const std::string header = slurp(csv).substr(0, slurp(csv).find('\n'));
    CHECK(header ==
          "graph_id,label,avg_degree,mean_degree_centrality,mean_clustering,density,node_count");

    const std::string dir = path_of("report");
    const CmdResult ra = run_cli("analyze --in " + csv + " --out-dir " + dir);
    REQUIRE(ra.status == 0);
    const json j = stdout_json(ra);
    CHECK(j["command"] == "analyze");
    CHECK(j["graphs"] == 20);
    for (const char* key : {"box", "scatter", "histogram", "correlation", "comparisons"})
        CHECK(j.contains(key));
    for (const char* file :
         {"boxstats.csv", "scatter.csv", "histogram.csv", "correlation.csv"})
        CHECK(std::filesystem::exists(dir + "/" + std::string(file)));
}

TEST_CASE("train, eval, and the checkpoint agree") {
    const std::string data = gen_small("train_in.ndjson");
    const std::string ckpt = path_of("model.ckpt");
    const std::string log = path_of("epochs.csv");

    const CmdResult rt = run_cli("train --data " + data + " --model gcn --epochs 3" +
                                 " --hidden 8 --batch-size 8 --dropout 0 --seed 5" +
                                 " --out " + ckpt + " --log " + log);
    REQUIRE(rt.status == 0);
    const json jt = stdout_json(rt);
    CHECK(jt["command"] == "train");
    CHECK(jt["model"] == "gcn");
    CHECK(jt["best_epoch"].get<int>() >= 1);
    CHECK(jt["val"]["accuracy"].get<double>() >= 0.0);
    CHECK(jt["test"]["count"].get<int>() > 0);
    CHECK(std::filesystem::exists(ckpt));
    CHECK(slurp(log).rfind("epoch,train_loss,val_accuracy,val_macro_f1,val_auc\n", 0) == 0);

    const CmdResult re = run_cli("eval --data " + data + " --checkpoint " + ckpt +
                                 " --split test");
    REQUIRE(re.status == 0);
    const json je = stdout_json(re);
    CHECK(je["command"] == "eval");
    CHECK(je["model"] == "gcn");
    CHECK(je["split"] == "test");
    CHECK(je["accuracy"] == jt["test"]["accuracy"]);
    CHECK(je["macro_f1"] == jt["test"]["macro_f1"]);
    CHECK(je["confusion"] == jt["test"]["confusion"]);

    const CmdResult rbad = run_cli("eval --data " + data + " --checkpoint " + ckpt +
                                   " --split holdout");
    CHECK(rbad.status == 1);
}

TEST_CASE("ablate reports the three settings") {
    const std::string data = gen_small("abl_in.ndjson", "--structure-signal 0.3");
    const CmdResult r = run_cli("ablate --data " + data +
                                " --model gcn --epochs 2 --hidden 8 --batch-size 8"
                                " --dropout 0 --seed 6");
    REQUIRE(r.status == 0);
    const json j = stdout_json(r);
    CHECK(j["command"] == "ablate");
    for (const char* key : {"accuracy_original", "accuracy_feature_only",
                            "accuracy_structure_only", "degradation_structure",
                            "degradation_features"}) {
        CAPTURE(key);
        CHECK(j.contains(key));
    }
    CHECK(j["preserve_degrees"] == false);
    const double orig = j["accuracy_original"].get<double>();
    CHECK(orig >= 0.0);
    CHECK(orig <= 1.0);
}

TEST_CASE("gradcheck passes at the documented tolerance and fails at an absurd one") {
    const CmdResult ok = run_cli("gradcheck --samples 20 --seed 3");
    REQUIRE(ok.status == 0);
    const json j = stdout_json(ok);
    CHECK(j["passed"] == true);
    CHECK(j["cases"].size() > 0);
    for (const auto& c : j["cases"]) CHECK(c["passed"] == true);

    const CmdResult bad = run_cli("gradcheck --samples 20 --seed 3 --tolerance 1e-300");
    CHECK(bad.status == 3);
    CHECK(stdout_json(bad)["passed"] == false);
}

TEST_CASE("data errors exit with code 2") {
    SUBCASE("missing dataset") {
        const CmdResult r = run_cli("train --data " + path_of("nope.ndjson"));
        CHECK(r.status == 2);
        CHECK(error_code(r) == "IoError");
    }
    SUBCASE("missing checkpoint") {
        const std::string data = gen_small("err_in.ndjson");
        const CmdResult r =
            run_cli("eval --data " + data + " --checkpoint " + path_of("nope.ckpt"));
        CHECK(r.status == 2);
    }
    SUBCASE("corrupt dataset names the line") {
        const std::string bad = path_of("corrupt.ndjson");
        spit(bad, "not json\n");
        const CmdResult r = run_cli("summarize --in " + bad + " --out " + path_of("c.csv"));
        CHECK(r.status == 2);
        CHECK(error_code(r) == "ParseError");
        CHECK(r.err.find(":1:") != std::string::npos);
    }
}

TEST_CASE("config files fill in defaults but never override flags") {
    const std::string cfg = path_of("gen.cfg");
    spit(cfg,
         "# sample config\n"
         "graphs = 3\n"
         "name = \"from-config\"\n"
         "seed = 11\n");

    SUBCASE("file values apply where no flag was given") {
        const CmdResult r = run_cli("gen --out " + path_of("cfg_a.ndjson") + " --config " + cfg);
        REQUIRE(r.status == 0);
        const json j = stdout_json(r);
        CHECK(j["graphs"] == 6);
        CHECK(j["name"] == "from-config");
        CHECK(j["seed"] == 11);
    }
    SUBCASE("explicit flags win over the file") {
        const CmdResult r = run_cli("gen --out " + path_of("cfg_b.ndjson") + " --config " + cfg +
                                    " --name cli-name --seed 22");
        REQUIRE(r.status == 0);
        const json j = stdout_json(r);
        CHECK(j["graphs"] == 6);
        CHECK(j["name"] == "cli-name");
        CHECK(j["seed"] == 22);
    }
    SUBCASE("defaults hold for keys in neither place") {
        const CmdResult r = run_cli("gen --out " + path_of("cfg_c.ndjson") + " --config " + cfg);
        REQUIRE(r.status == 0);
        CHECK(stdout_json(r)["feat_dim"] == 16);
    }
    SUBCASE("unknown keys are rejected") {
        const std::string bad = path_of("bad.cfg");
        spit(bad, "bogus = 1\n");
        const CmdResult r = run_cli("gen --out " + path_of("cfg_d.ndjson") + " --config " + bad);
        CHECK(r.status == 1);
        CHECK(error_code(r) == "UsageError");
    }
    SUBCASE("missing config file is a usage error") {
        const CmdResult r =
            run_cli("gen --out " + path_of("cfg_e.ndjson") + " --config " + path_of("nope.cfg"));
        CHECK(r.status == 1);
        CHECK(error_code(r) == "ConfigFile");
    }
    SUBCASE("lines without key=value are rejected") {
        const std::string bad = path_of("syntax.cfg");
        spit(bad, "just words\n");
        const CmdResult r = run_cli("gen --out " + path_of("cfg_f.ndjson") + " --config " + bad);
        CHECK(r.status == 1);
        CHECK(error_code(r) == "ConfigFile");
    }
}

int main(int argc, char** argv) {
    for (int i = argc - 1; i >= 1; --i) {
        const std::string a = argv[i];
        if (!a.empty() && a[0] != '-') {
            g_bin = a;
            break;
        }
    }
    if (g_bin.empty() || !std::filesystem::exists(g_bin)) {
        std::fprintf(stderr, "usage: test_cli <path-to-newsprop-binary>\n");
        return 64;
    }
    g_dir = "/tmp/newsprop_cli_test";
    std::filesystem::remove_all(g_dir);
    std::filesystem::create_directories(g_dir);
    doctest::Context context(argc, argv);
    const int rc = context.run();
    std::filesystem::remove_all(g_dir);
    return rc;
}
