#include "rgnn/checkpoint.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace rgnn {

namespace {

void write_matrix(std::ostream& out, const std::string& name, const Tensor& t) {
    require_finite(t, name.c_str());
    out << "param " << name << ' ' << t.rows << ' ' << t.cols << '\n';
    char buf[64];
    for (int i = 0; i < t.rows; ++i) {
        const double* row = t.row_ptr(i);
        for (int j = 0; j < t.cols; ++j) {
            std::snprintf(buf, sizeof(buf), "%a", row[j]);
            out << (j ? " " : "") << buf;
        }
        out << '\n';
    }
}

class Reader {
public:
    Reader(const std::string& path, std::istream& in) : path_(path), in_(in) {}

    std::string next_line() {
        std::string line;
        while (std::getline(in_, line)) {
            ++lineno_;
            if (!line.empty()) return line;
        }
        fail("unexpected end of file");
        return {};
    }

    [[noreturn]] void fail(const std::string& msg) const {
        throw std::runtime_error(path_ + ":" + std::to_string(lineno_) + ": " + msg);
    }

    Tensor read_matrix(const std::string& expect_name) {
        std::istringstream hdr(next_line());
        std::string tag, name;
        int rows, cols;
        if (!(hdr >> tag >> name >> rows >> cols) || tag != "param")
            fail("expected `param <name> <rows> <cols>`");
        if (name != expect_name) fail("expected parameter `" + expect_name + "`, got `" + name + "`");
        if (rows < 1 || cols < 1) fail("bad shape for " + name);
        Tensor t(rows, cols);
        for (int i = 0; i < rows; ++i) {
            std::string line = next_line();
            const char* p = line.c_str();
            char* end = nullptr;
            for (int j = 0; j < cols; ++j) {
                t.at(i, j) = std::strtod(p, &end);
                if (end == p) fail("bad value in row " + std::to_string(i));
                p = end;
            }
            while (*p == ' ') ++p;
            if (*p != '\0') fail("extra values in row " + std::to_string(i));
        }
        require_finite(t, name.c_str());
        return t;
    }

private:
    std::string path_;
    std::istream& in_;
    int lineno_ = 0;
};

}  // namespace

void save_checkpoint(const std::string& path, const Checkpoint& ck) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << "rgnn-checkpoint v1\n";
    out << "encoder intra=" << to_string(ck.cfg.intra) << " inter=" << to_string(ck.cfg.inter)
        << " layers=" << ck.cfg.layers << " depth=" << ck.cfg.perceptron_depth
        << " bottleneck=" << ck.cfg.bottleneck_dim << " hidden=" << ck.cfg.hidden_dim << '\n';
    out << "dims feature=" << ck.feature_dim << " classes=" << ck.num_classes << '\n';
    const auto tensors = ck.params.all();
    const auto names = ck.params.names();
    for (size_t i = 0; i < tensors.size(); ++i) write_matrix(out, names[i], *tensors[i]);
    out << "end\n";
    if (!out) throw std::runtime_error("write failed for " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read " + path);
    Reader r(path, in);
    if (r.next_line() != "rgnn-checkpoint v1") r.fail("not a v1 checkpoint");

    Checkpoint ck;
    {
        std::istringstream hdr(r.next_line());
        std::string tag;
        hdr >> tag;
        if (tag != "encoder") r.fail("expected encoder line");
        std::string kv;
        while (hdr >> kv) {
            auto eq = kv.find('=');
            if (eq == std::string::npos) r.fail("bad encoder field `" + kv + "`");
            std::string key = kv.substr(0, eq), val = kv.substr(eq + 1);
            try {
                if (key == "intra") ck.cfg.intra = intra_from_string(val);
                else if (key == "inter") ck.cfg.inter = inter_from_string(val);
                else if (key == "layers") ck.cfg.layers = std::stoi(val);
                else if (key == "depth") ck.cfg.perceptron_depth = std::stoi(val);
                else if (key == "bottleneck") ck.cfg.bottleneck_dim = std::stoi(val);
                else if (key == "hidden") ck.cfg.hidden_dim = std::stoi(val);
                else r.fail("unknown encoder field `" + key + "`");
            } catch (const std::invalid_argument& e) {
                r.fail(e.what());
            }
        }
    }
    {
        std::istringstream hdr(r.next_line());
        std::string tag;
        int f = 0, c = 0;
        std::string kv;
        hdr >> tag;
        if (tag != "dims") r.fail("expected dims line");
        while (hdr >> kv) {
            std::istringstream kvs(kv);
            std::string key;
            std::getline(kvs, key, '=');
            if (key == "feature") kvs >> f;
            else if (key == "classes") kvs >> c;
            else r.fail("unknown dims field `" + key + "`");
        }
        if (f < 1 || c < 2) r.fail("bad dims");
        ck.feature_dim = f;
        ck.num_classes = c;
    }
    validate_encoder_config(ck.cfg, ck.feature_dim);

    // Shapes come from a reference initialization so a corrupted file cannot
    // produce an inconsistent parameter set.
    ModelParams ref = init_params(ck.cfg, ck.feature_dim, ck.num_classes, 0);
    const auto names = ref.names();
    ck.params = ref;
    auto tensors = ck.params.all();
    for (size_t i = 0; i < tensors.size(); ++i) {
        Tensor loaded = r.read_matrix(names[i]);
        if (!loaded.same_shape(*tensors[i]))
            r.fail("parameter " + names[i] + " has shape " + loaded.shape_str() + ", expected " +
                   tensors[i]->shape_str());
        *tensors[i] = std::move(loaded);
    }
    if (r.next_line() != "end") r.fail("expected end marker");
    return ck;
}

void save_surrogate(const std::string& path, const SurrogateModel& model) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << "rgnn-surrogate v1\n";
    write_matrix(out, "w1", model.w1);
    write_matrix(out, "w2", model.w2);
    out << "end\n";
    if (!out) throw std::runtime_error("write failed for " + path);
}

SurrogateModel load_surrogate(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read " + path);
    Reader r(path, in);
    if (r.next_line() != "rgnn-surrogate v1") r.fail("not a v1 surrogate checkpoint");
    SurrogateModel m;
    m.w1 = r.read_matrix("w1");
    m.w2 = r.read_matrix("w2");
    if (m.w1.cols != m.w2.rows) r.fail("w1/w2 widths disagree");
    m.num_classes = m.w2.cols;
    if (r.next_line() != "end") r.fail("expected end marker");
    return m;
}

}  // namespace rgnn
