#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "rgnn/checkpoint.hpp"
#include "rgnn/config.hpp"
#include "rgnn/sbm.hpp"

using namespace rgnn;

namespace {

bool has_error_containing(const ConfigResult& r, const std::string& needle) {
    for (const std::string& e : r.errors)
        if (e.find(needle) != std::string::npos) return true;
    return false;
}

std::filesystem::path temp_dir() {
    auto dir = std::filesystem::temp_directory_path() / "rgnn_config_test";
    std::filesystem::create_directories(dir);
    return dir;
}

}  // namespace

TEST_CASE("empty input yields the default configuration") {
    for (const char* text : {"", "{}"}) {
        ConfigResult r = parse_config_text(text, "inline");
        REQUIRE(r.ok());
        CHECK(r.config.dataset.kind == "sbm");
        CHECK(r.config.dataset.blocks == std::vector<int>{100, 100});
        CHECK(r.config.encoder.layers == 3);
        CHECK(r.config.training.epochs == 200);
        CHECK(r.config.defenses == std::vector<TrainMode>{TrainMode::Plain});
        CHECK(r.config.attacks.size() == 3);
        CHECK(r.config.seeds.size() == 5);
        CHECK(r.config.output_dir == "out");
    }
}

TEST_CASE("unknown keys are rejected at every level") {
    ConfigResult top = parse_config_text(R"({"datasets": {}})", "inline");
    CHECK_FALSE(top.ok());
    CHECK(has_error_containing(top, "datasets"));

    ConfigResult nested = parse_config_text(R"({"training": {"momentum": 0.9}})", "inline");
    CHECK_FALSE(nested.ok());
    CHECK(has_error_containing(nested, "momentum"));

    ConfigResult evalk = parse_config_text(R"({"eval": {"budget": 3}})", "inline");
    CHECK_FALSE(evalk.ok());
    CHECK(has_error_containing(evalk, "budget"));
}

TEST_CASE("violations carry the dotted field path") {
    ConfigResult r = parse_config_text(R"({"training": {"lr": -1}})", "inline");
    CHECK_FALSE(r.ok());
    CHECK(has_error_containing(r, "training.lr"));

    ConfigResult e = parse_config_text(R"({"training": {"epochs": 0}})", "inline");
    CHECK(has_error_containing(e, "training.epochs"));

    ConfigResult t = parse_config_text(R"({"training": {"lr": "fast"}})", "inline");
    CHECK_FALSE(t.ok());
    CHECK(has_error_containing(t, "training.lr"));
}

TEST_CASE("all violations are collected, not just the first") {
    ConfigResult r = parse_config_text(
        R"({"training": {"lr": -1, "epochs": 0}, "dataset": {"p_in": 2.0}, "bogus": 1})",
        "inline");
    CHECK_FALSE(r.ok());
    CHECK(r.errors.size() >= 4);
    CHECK(has_error_containing(r, "training.lr"));
    CHECK(has_error_containing(r, "training.epochs"));
    CHECK(has_error_containing(r, "dataset.p_in"));
    CHECK(has_error_containing(r, "bogus"));
}

TEST_CASE("encoder widths are validated against the dataset features") {
    // feature_dim 8 with a 16-wide bottleneck cannot funnel
    ConfigResult r = parse_config_text(
        R"({"dataset": {"feature_dim": 8}, "encoder": {"bottleneck_dim": 16, "hidden_dim": 0}})",
        "inline");
    CHECK_FALSE(r.ok());
    CHECK(has_error_containing(r, "encoder"));

    ConfigResult ok = parse_config_text(
        R"({"dataset": {"feature_dim": 64}, "encoder": {"bottleneck_dim": 16, "hidden_dim": 32}})",
        "inline");
    CHECK(ok.ok());
}

TEST_CASE("defense accepts a single name or a list") {
    ConfigResult one = parse_config_text(R"({"defense": "acl"})", "inline");
    REQUIRE(one.ok());
    CHECK(one.config.defenses == std::vector<TrainMode>{TrainMode::Acl});

    ConfigResult many = parse_config_text(R"({"defense": ["plain", "ncl", "acl"]})", "inline");
    REQUIRE(many.ok());
    CHECK(many.config.defenses ==
          std::vector<TrainMode>{TrainMode::Plain, TrainMode::Ncl, TrainMode::Acl});

    ConfigResult bad = parse_config_text(R"({"defense": "bn"})", "inline");
    CHECK_FALSE(bad.ok());
    CHECK(has_error_containing(bad, "defense"));

    ConfigResult dup = parse_config_text(R"({"defense": ["acl", "acl"]})", "inline");
    CHECK_FALSE(dup.ok());
}

TEST_CASE("attack and seed lists parse and validate") {
    ConfigResult r = parse_config_text(
        R"({"attacks": ["nettack"], "seeds": [10, 11], "eval": {"sweep_axes": ["intra", "dim"]}})",
        "inline");
    REQUIRE(r.ok());
    CHECK(r.config.attacks == std::vector<AttackKind>{AttackKind::Nettack});
    CHECK(r.config.seeds == std::vector<std::uint64_t>{10, 11});
    CHECK(r.config.eval.sweep_axes == std::vector<std::string>{"intra", "dim"});

    CHECK_FALSE(parse_config_text(R"({"attacks": ["meta"]})", "inline").ok());
    CHECK_FALSE(parse_config_text(R"({"seeds": []})", "inline").ok());
    CHECK_FALSE(parse_config_text(R"({"eval": {"sweep_axes": ["depth"]}})", "inline").ok());
    CHECK_FALSE(parse_config_text(R"({"eval": {"sweep_budgets": [0]}})", "inline").ok());
}

TEST_CASE("malformed json reports the source name") {
    ConfigResult r = parse_config_text("{not json", "cfg.json");
    CHECK_FALSE(r.ok());
    REQUIRE(!r.errors.empty());
    CHECK(r.errors[0].find("cfg.json") != std::string::npos);
}

TEST_CASE("config files load from disk with defaults for absent files") {
    auto dir = temp_dir();
    auto path = dir / "experiment.json";
    std::ofstream(path) << R"({"training": {"epochs": 7}})";
    ConfigResult r = load_config_file(path.string());
    REQUIRE(r.ok());
    CHECK(r.config.training.epochs == 7);

    ConfigResult missing = load_config_file((dir / "absent.json").string());
    CHECK_FALSE(missing.ok());
    CHECK(has_error_containing(missing, "absent.json"));
}

TEST_CASE("normalized json round-trips through the parser") {
    ConfigResult r = parse_config_text(
        R"({"defense": ["plain", "acl"], "training": {"lr": 0.02}, "dataset": {"p_out": 0.01}})",
        "inline");
    REQUIRE(r.ok());
    std::string dumped = config_to_json(r.config);
    ConfigResult back = parse_config_text(dumped, "roundtrip");
    REQUIRE(back.ok());
    CHECK(config_to_json(back.config) == dumped);
    CHECK(back.config.training.lr == 0.02);
    CHECK(back.config.dataset.p_out == 0.01);
    CHECK(back.config.defenses.size() == 2);
}

TEST_CASE("dataset loader dispatches on kind") {
    DatasetConfig d;
    d.blocks = {10, 10};
    d.p_in = 0.5;
    d.p_out = 0.05;
    d.feature_dim = 20;
    d.sbm_seed = 3;
    Graph g = load_dataset(d);
    CHECK(g.num_nodes() == 20);
    CHECK(g.feature_dim() == 20);

    // the generator seed fixes the dataset identity
    Graph h = load_dataset(d);
    CHECK(g.edge_list() == h.edge_list());

    d.largest_component = true;
    Graph lcc = load_dataset(d);
    CHECK(lcc.num_nodes() <= g.num_nodes());

    DatasetConfig files;
    files.kind = "custom";
    auto dir = temp_dir();
    std::ofstream(dir / "e.txt") << "0 1\n1 2\n";
    std::ofstream(dir / "l.txt") << "0\t0\n1\t1\n2\t0\n";
    files.edges = (dir / "e.txt").string();
    files.labels = (dir / "l.txt").string();
    Graph custom = load_dataset(files);
    CHECK(custom.num_nodes() == 3);
    CHECK(custom.feature_dim() == 3);  // identity features

    DatasetConfig named;
    named.kind = "cora";
    named.data_dir = (dir / "nowhere").string();
    CHECK_THROWS(load_dataset(named));
}

TEST_CASE("model checkpoints round-trip bit for bit") {
    EncoderConfig cfg;
    cfg.intra = IntraMode::Max;
    cfg.inter = InterMode::Skip;
    cfg.layers = 2;
    cfg.perceptron_depth = 2;
    cfg.bottleneck_dim = 3;
    cfg.hidden_dim = 5;
    Checkpoint ck;
    ck.cfg = cfg;
    ck.feature_dim = 9;
    ck.num_classes = 3;
    ck.params = init_params(cfg, 9, 3, 1234);
    // make the payload awkward: denormals, negative zero, huge exponents
    ck.params.dec_w.at(0, 0) = -0.0;
    ck.params.dec_w.at(0, 1) = 5e-324;
    ck.params.dec_w.at(0, 2) = -1.7976931348623157e308;
    ck.params.readout_w.at(1, 1) = 1.0 / 3.0;

    auto path = (temp_dir() / "model.ckpt").string();
    save_checkpoint(path, ck);
    Checkpoint back = load_checkpoint(path);

    CHECK(back.cfg.intra == cfg.intra);
    CHECK(back.cfg.inter == cfg.inter);
    CHECK(back.cfg.layers == cfg.layers);
    CHECK(back.cfg.perceptron_depth == cfg.perceptron_depth);
    CHECK(back.cfg.bottleneck_dim == cfg.bottleneck_dim);
    CHECK(back.cfg.hidden_dim == cfg.hidden_dim);
    CHECK(back.feature_dim == 9);
    CHECK(back.num_classes == 3);

    auto a = ck.params.all();
    auto b = back.params.all();
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        REQUIRE(a[i]->same_shape(*b[i]));
        for (std::size_t j = 0; j < a[i]->data.size(); ++j) {
            // bitwise comparison: memcmp distinguishes -0.0 from 0.0
            CHECK(std::memcmp(&a[i]->data[j], &b[i]->data[j], sizeof(double)) == 0);
        }
    }
}

TEST_CASE("checkpoint loader rejects tampered files") {
    EncoderConfig cfg;
    cfg.layers = 1;
    cfg.perceptron_depth = 1;
    cfg.bottleneck_dim = 2;
    Checkpoint ck;
    ck.cfg = cfg;
    ck.feature_dim = 4;
    ck.num_classes = 2;
    ck.params = init_params(cfg, 4, 2, 1);
    auto dir = temp_dir();
    auto path = (dir / "tamper.ckpt").string();
    save_checkpoint(path, ck);

    std::ifstream in(path);
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    in.close();

    // wrong version line
    std::ofstream(dir / "v.ckpt") << "rgnn-checkpoint v9\n" << text.substr(text.find('\n') + 1);
    CHECK_THROWS_AS(load_checkpoint((dir / "v.ckpt").string()), std::runtime_error);

    // truncated payload
    std::ofstream(dir / "t.ckpt") << text.substr(0, text.size() / 2);
    CHECK_THROWS_AS(load_checkpoint((dir / "t.ckpt").string()), std::runtime_error);

    CHECK_THROWS_AS(load_checkpoint((dir / "missing.ckpt").string()), std::runtime_error);
}

TEST_CASE("surrogate checkpoints restore the trained weights") {
    Graph g = largest_connected_component(generate_sbm({12, 12}, 0.5, 0.05, 10, 0.1, 2));
    std::vector<int> train;
    for (int v = 0; v < g.num_nodes(); ++v) train.push_back(v);
    SurrogateModel m = train_surrogate(g, train, 2);

    auto path = (temp_dir() / "surrogate.ckpt").string();
    save_surrogate(path, m);
    SurrogateModel back = load_surrogate(path);
    CHECK(back.w1.data == m.w1.data);
    CHECK(back.w2.data == m.w2.data);
    CHECK(back.num_classes == m.num_classes);
    CHECK(back.prop.data.empty());  // cache is rebuilt on demand
    back.refresh_prop(g.features());
    CHECK(back.prop.data == m.prop.data);
}
