#include "graf/checkpoint.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace graf {

namespace {

struct TensorShape {
    std::string name;
    std::size_t rows;
    std::size_t cols;
};

std::vector<TensorShape> tensor_shapes(const Model& m) {
    std::vector<TensorShape> out;
    const std::size_t d = m.dim();
    for (std::size_t h = 0; h < m.gat.head_count(); ++h) {
        const std::string prefix = "head" + std::to_string(h) + ".";
        out.push_back({prefix + "w_node", d, d});
        out.push_back({prefix + "w_edge", d, d});
        out.push_back({prefix + "a_node", 1, 2 * d});
        out.push_back({prefix + "a_edge", 1, 2 * d});
    }
    out.push_back({"w_query", d, d});
    out.push_back({"w_key", d, d});
    out.push_back({"w_value", d, d});
    out.push_back({"w_final", 1, d});
    return out;
}

void append_double(std::string& out, double x) {
    char buf[32];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, x);
    out.append(buf, end);
}

}  // namespace

std::string serialize_checkpoint(const Model& model, const CheckpointMeta& meta) {
    std::string out = "graf-checkpoint 1\n";
    out += "dim " + std::to_string(model.dim()) + " heads " + std::to_string(model.gat.head_count()) + " leaky_slope ";
    append_double(out, model.gat.leaky_slope);
    out += " encoder_seed " + std::to_string(meta.encoder_seed) + "\n";
    for (const auto& [k, v] : meta.attributes) {
        if (k.find_first_of(" \n") != std::string::npos || v.find('\n') != std::string::npos) {
            throw std::invalid_argument("checkpoint attribute keys may not contain spaces, values no newlines");
        }
        out += "attr " + k + " " + v + "\n";
    }
    const auto shapes = tensor_shapes(model);
    const auto tensors = model.tensors();
    for (std::size_t t = 0; t < shapes.size(); ++t) {
        const auto& s = shapes[t];
        out += "tensor " + s.name + " " + std::to_string(s.rows) + " " + std::to_string(s.cols) + "\n";
        for (std::size_t r = 0; r < s.rows; ++r) {
            for (std::size_t c = 0; c < s.cols; ++c) {
                if (c > 0) out += ' ';
                append_double(out, tensors[t][r * s.cols + c]);
            }
            out += '\n';
        }
    }
    return out;
}

void save_checkpoint(const Model& model, const CheckpointMeta& meta, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write checkpoint " + path.string());
    out << serialize_checkpoint(model, meta);
    if (!out) throw std::runtime_error("write failed for checkpoint " + path.string());
}

Checkpoint parse_checkpoint(std::string_view text, std::string_view source) {
    std::istringstream in{std::string(text)};
    std::string line;
    std::size_t lineno = 0;
    auto fail = [&](const std::string& why) {
        return std::runtime_error(std::string(source) + ":" + std::to_string(lineno) + ": " + why);
    };
    auto next_line = [&]() -> bool {
        while (std::getline(in, line)) {
            ++lineno;
            if (!line.empty() && line.back() == '\r') line.pop_back();
            if (!line.empty()) return true;
        }
        return false;
    };

    if (!next_line() || line != "graf-checkpoint 1") throw fail("not a graf checkpoint (bad header)");
    if (!next_line()) throw fail("missing dimensions line");
    std::size_t dim = 0;
    std::size_t heads = 0;
    double slope = 0.0;
    Checkpoint cp;
    {
        std::istringstream ls(line);
        std::string k1, k2, k3, k4, slope_text;
        ls >> k1 >> dim >> k2 >> heads >> k3 >> slope_text >> k4 >> cp.meta.encoder_seed;
        if (!ls || k1 != "dim" || k2 != "heads" || k3 != "leaky_slope" || k4 != "encoder_seed") {
            throw fail("expected 'dim <d> heads <h> leaky_slope <s> encoder_seed <seed>'");
        }
        auto [p, ec] = std::from_chars(slope_text.data(), slope_text.data() + slope_text.size(), slope);
        if (ec != std::errc{} || p != slope_text.data() + slope_text.size()) throw fail("bad leaky_slope");
        if (dim == 0 || heads == 0) throw fail("dim and heads must be positive");
    }
    cp.model = Model::zeros(dim, heads, slope);
    const auto shapes = tensor_shapes(cp.model);
    auto tensors = cp.model.tensors();
    std::size_t t = 0;
    while (next_line()) {
        std::istringstream ls(line);
        std::string kind;
        ls >> kind;
        if (kind == "attr") {
            std::string key;
            ls >> key;
            std::string value;
            std::getline(ls, value);
            if (!value.empty() && value.front() == ' ') value.erase(0, 1);
            cp.meta.attributes[key] = value;
            continue;
        }
        if (kind != "tensor") throw fail("expected 'tensor' or 'attr'");
        if (t >= shapes.size()) throw fail("more tensors than the model has");
        std::string name;
        std::size_t rows = 0;
        std::size_t cols = 0;
        ls >> name >> rows >> cols;
        const auto& s = shapes[t];
        if (name != s.name || rows != s.rows || cols != s.cols) {
            throw fail("expected tensor " + s.name + " " + std::to_string(s.rows) + "x" + std::to_string(s.cols));
        }
        for (std::size_t r = 0; r < rows; ++r) {
            if (!next_line()) throw fail("truncated tensor " + name);
            const char* p = line.data();
            const char* end = line.data() + line.size();
            for (std::size_t c = 0; c < cols; ++c) {
                while (p < end && *p == ' ') ++p;
                double x = 0.0;
                auto [q, ec] = std::from_chars(p, end, x);
                if (ec != std::errc{} || !std::isfinite(x)) throw fail("bad value in tensor " + name);
                tensors[t][r * cols + c] = x;
                p = q;
            }
            while (p < end && *p == ' ') ++p;
            if (p != end) throw fail("too many values in a row of tensor " + name);
        }
        ++t;
    }
    if (t != shapes.size()) throw fail("checkpoint ends after " + std::to_string(t) + " of " + std::to_string(shapes.size()) + " tensors");
    cp.model.validate();
    return cp;
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open checkpoint " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_checkpoint(buf.str(), path.string());
}

}  // namespace graf
