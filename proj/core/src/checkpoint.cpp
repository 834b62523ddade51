#include "folio/checkpoint.hpp"

#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>

#include "folio/errors.hpp"

namespace folio {

namespace {

void expect(std::istream& in, const std::string& token) {
    std::string got;
    if (!(in >> got) || got != token) {
        throw Error(ErrorCode::IoError, "checkpoint: expected '" + token + "', got '" + got + "'");
    }
}

}  // namespace

void write_checkpoint(std::ostream& out, const PolicyParams& params) {
    const auto& c = params.config;
    out << "folio-checkpoint " << kCheckpointVersion << '\n';
    out << "config " << c.n_assets << ' ' << c.window << ' ' << c.kernel_width << ' '
        << c.conv1_channels << ' ' << c.conv2_channels << '\n';
    out << "seed " << params.seed << '\n';
    char buf[32];
    for (const auto& b : params.blocks) {
        out << "block " << b.name << ' ' << (b.decays ? 1 : 0) << ' ' << b.value.rank();
        for (auto d : b.value.shape()) out << ' ' << d;
        out << '\n';
        for (std::size_t i = 0; i < b.value.size(); ++i) {
            std::snprintf(buf, sizeof(buf), "%.17g", b.value[i]);
            out << buf << ((i + 1) % 8 == 0 || i + 1 == b.value.size() ? '\n' : ' ');
        }
    }
    out << "end\n";
}

PolicyParams read_checkpoint(std::istream& in) {
    expect(in, "folio-checkpoint");
    int version = 0;
    in >> version;
    if (version != kCheckpointVersion) {
        throw Error(ErrorCode::IoError, "unsupported checkpoint version " + std::to_string(version));
    }
    PolicyConfig config;
    expect(in, "config");
    in >> config.n_assets >> config.window >> config.kernel_width >> config.conv1_channels >>
        config.conv2_channels;
    std::uint64_t seed = 0;
    expect(in, "seed");
    in >> seed;
    if (!in) throw Error(ErrorCode::IoError, "checkpoint: malformed header");

    // Shapes are validated against a freshly initialized network.
    PolicyParams params = init_policy(config, seed);
    for (auto& b : params.blocks) {
        expect(in, "block");
        std::string name;
        int decays = 0;
        std::size_t rank = 0;
        in >> name >> decays >> rank;
        ad::Shape shape(rank);
        for (auto& d : shape) in >> d;
        if (!in || name != b.name || shape != b.value.shape()) {
            throw Error(ErrorCode::IoError, "checkpoint: block '" + name + "' does not match '" + b.name +
                                                "' " + ad::shape_string(b.value.shape()));
        }
        b.decays = decays != 0;
        for (double& v : b.value.data()) {
            std::string tok;
            in >> tok;
            try {
                v = std::stod(tok);
            } catch (const std::exception&) {
                throw Error(ErrorCode::IoError, "checkpoint: bad value '" + tok + "' in " + name);
            }
        }
    }
    expect(in, "end");
    params.zero_grad();
    return params;
}

void save_checkpoint(const std::filesystem::path& path, const PolicyParams& params) {
    std::ofstream out(path);
    if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
    write_checkpoint(out, params);
}

PolicyParams load_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
    return read_checkpoint(in);
}

}  // namespace folio
