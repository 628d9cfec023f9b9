#include "esvm/chain.hpp"

#include <array>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iomanip>

#include <json.hpp>

#include "esvm/error.hpp"

namespace esvm {

namespace {

constexpr std::array<char, 8> kMagic = {'E', 'S', 'V', 'M', 'T', 'R', 'A', 'J'};

static_assert(std::endian::native == std::endian::little, "trajectory I/O assumes a little-endian host");

void put_u32(std::ostream& out, std::uint32_t v) {
    std::array<char, 4> buf{};
    for (int i = 0; i < 4; ++i) buf[i] = static_cast<char>((v >> (8 * i)) & 0xffu);
    out.write(buf.data(), 4);
}

std::uint32_t get_u32(const char* p) {
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(static_cast<unsigned char>(p[i])) << (8 * i);
    return v;
}

}  // namespace

Trajectory::Trajectory(StateMatrix states, TrajectoryMeta meta) : states_(std::move(states)), meta_(std::move(meta)) {
    if (states_.rows() < 1) throw ConfigError("trajectory must contain at least one state");
    if (states_.cols() < 1) throw ConfigError("trajectory dimension must be positive");
    if (!states_.allFinite()) {
        for (Eigen::Index k = 0; k < states_.rows(); ++k) {
            if (!states_.row(k).allFinite())
                throw NumericError("non-finite state at index " + std::to_string(k));
        }
    }
}

double ergodic_average(const FunctionalSeries& series) {
    if (series.size() == 0) throw ConfigError("empty series");
    return series.values.mean();
}

Trajectory split_burn_in(const Trajectory& traj, std::size_t n_burn) {
    if (n_burn >= traj.size())
        throw ConfigError("burn-in " + std::to_string(n_burn) + " must be smaller than trajectory length " +
                          std::to_string(traj.size()));
    const auto keep = static_cast<Eigen::Index>(traj.size() - n_burn);
    StateMatrix tail = traj.states().bottomRows(keep);
    TrajectoryMeta meta = traj.meta();
    meta.burn_in_removed = true;
    meta.burn_in += n_burn;
    return Trajectory(std::move(tail), std::move(meta));
}

FunctionalSeries evaluate(const ScalarFunction& f, const Trajectory& traj) {
    FunctionalSeries out;
    out.values.resize(static_cast<Eigen::Index>(traj.size()));
    StateVector x(static_cast<Eigen::Index>(traj.dim()));
    for (std::size_t k = 0; k < traj.size(); ++k) {
        x = traj.state(k).transpose();
        const double v = f(x);
        if (!std::isfinite(v)) throw NumericError("functional is not finite at state index " + std::to_string(k));
        out.values[static_cast<Eigen::Index>(k)] = v;
    }
    return out;
}

void write_trajectory(const Trajectory& traj, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open for writing: " + path.string());
    out.write(kMagic.data(), kMagic.size());
    put_u32(out, static_cast<std::uint32_t>(traj.dim()));
    put_u32(out, 0);
    out.write(reinterpret_cast<const char*>(traj.states().data()),
              static_cast<std::streamsize>(traj.states().size() * sizeof(double)));
    if (!out) throw IoError("write failed: " + path.string());

    const auto& m = traj.meta();
    nlohmann::json meta = {
        {"n", traj.size()},          {"dim", traj.dim()},
        {"sampler", m.sampler},      {"step_size", m.step_size},
        {"seed_master", m.seed.master}, {"seed_stream", m.seed.stream},
        {"burn_in_removed", m.burn_in_removed}, {"burn_in", m.burn_in},
    };
    const auto side = std::filesystem::path(path.string() + ".json");
    std::ofstream js(side);
    if (!js) throw IoError("cannot open for writing: " + side.string());
    js << meta.dump(2) << '\n';
}

Trajectory read_trajectory(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open for reading: " + path.string());
    std::array<char, 16> header{};
    in.read(header.data(), header.size());
    if (in.gcount() != 16 || !std::equal(kMagic.begin(), kMagic.end(), header.begin()))
        throw IoError("not a trajectory file (bad magic): " + path.string());
    const std::uint32_t dim = get_u32(header.data() + 8);
    if (dim == 0) throw IoError("trajectory file declares zero dimension: " + path.string());

    const auto bytes = std::filesystem::file_size(path) - 16;
    const auto row_bytes = static_cast<std::uintmax_t>(dim) * sizeof(double);
    if (bytes % row_bytes != 0) throw IoError("truncated trajectory payload: " + path.string());
    const auto n = static_cast<Eigen::Index>(bytes / row_bytes);
    StateMatrix states(n, dim);
    in.read(reinterpret_cast<char*>(states.data()), static_cast<std::streamsize>(bytes));
    if (!in) throw IoError("read failed: " + path.string());

    TrajectoryMeta meta;
    const auto side = std::filesystem::path(path.string() + ".json");
    if (std::filesystem::exists(side)) {
        std::ifstream js(side);
        try {
            const auto j = nlohmann::json::parse(js);
            meta.sampler = j.value("sampler", "");
            meta.step_size = j.value("step_size", 0.0);
            meta.seed.master = j.value("seed_master", std::uint64_t{0});
            meta.seed.stream = j.value("seed_stream", std::uint32_t{0});
            meta.burn_in_removed = j.value("burn_in_removed", false);
            meta.burn_in = j.value("burn_in", std::size_t{0});
        } catch (const nlohmann::json::exception& e) {
            throw IoError("malformed sidecar " + side.string() + ": " + e.what());
        }
    }
    return Trajectory(std::move(states), std::move(meta));
}

void write_trajectory_csv(const Trajectory& traj, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open for writing: " + path.string());
    out << std::setprecision(17);
    for (std::size_t j = 0; j < traj.dim(); ++j) out << (j ? "," : "") << "x" << j;
    out << '\n';
    for (std::size_t k = 0; k < traj.size(); ++k) {
        const auto row = traj.state(k);
        for (Eigen::Index j = 0; j < row.size(); ++j) out << (j ? "," : "") << row[j];
        out << '\n';
    }
    if (!out) throw IoError("write failed: " + path.string());
}

}  // namespace esvm
