// Shared fixtures for the unit tests.
#pragma once

#include <atomic>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <unistd.h>

#include "adaptp/trajectory.hpp"

namespace testutil {

/// Fresh scratch directory under the system temp dir, removed on exit.
class TempDir {
  public:
    explicit TempDir(const std::string &tag) {
        static std::atomic<int> counter{0};
        path_ = std::filesystem::temp_directory_path() /
                ("adaptp_" + tag + "_" + std::to_string(::getpid()) + "_" +
                 std::to_string(counter++));
        std::filesystem::remove_all(path_);
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir &) = delete;
    TempDir &operator=(const TempDir &) = delete;

    const std::filesystem::path &path() const { return path_; }
    std::string operator/(const std::string &name) const { return (path_ / name).string(); }

  private:
    std::filesystem::path path_;
};

inline std::string slurp(const std::string &path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

/// Trajectory at the 6 s cadence from altitude/TAS lists.
inline adaptp::Trajectory make_traj(const std::string &id, adaptp::Phase phase,
                                    double target, std::initializer_list<double> h,
                                    double tas = 300.0) {
    adaptp::Trajectory t;
    t.id = id;
    t.aircraft_type = "JM2";
    t.phase = phase;
    t.day_tag = "D01";
    t.h_target_ft = target;
    double time = 0.0;
    for (double v : h) {
        t.blips.push_back({time, v, tas, 0.0});
        time += adaptp::kBlipInterval;
    }
    return t;
}

} // namespace testutil
