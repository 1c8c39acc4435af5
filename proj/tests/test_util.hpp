#pragma once

#include <sys/wait.h>
#include <unistd.h>

#include <atomic>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include "catp/attnio.hpp"

namespace catp::testutil {

// Scratch directory removed on scope exit.
class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        static std::atomic<unsigned> counter{0};
        path_ = std::filesystem::temp_directory_path() /
                ("catp-" + tag + "-" + std::to_string(::getpid()) + "-" +
                 std::to_string(counter++));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path file(const std::string& name) const { return path_ / name; }

private:
    std::filesystem::path path_;
};

inline void write_bytes(const std::filesystem::path& path, const std::string& bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

inline std::string read_bytes(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

// f32-representable positive values, so file round-trips are bit-exact.
inline std::vector<double> random_f32_payload(std::mt19937_64& rng, std::size_t count,
                                              bool allow_negative = false) {
    std::uniform_real_distribution<float> dist(allow_negative ? -1.0f : 0.0f, 1.0f);
    std::vector<double> out(count);
    for (double& v : out) v = static_cast<double>(dist(rng));
    return out;
}

inline catp::AttnTensor random_attn(std::mt19937_64& rng, std::size_t layers, std::size_t heads,
                                    std::size_t n_query, std::size_t n_image) {
    return catp::AttnTensor(layers, heads, n_query, n_image,
                            random_f32_payload(rng, layers * heads * n_query * n_image));
}

// Row-normalized tensor (each image-axis row sums to ~1 in double).
inline catp::AttnTensor random_normalized_attn(std::mt19937_64& rng, std::size_t layers,
                                               std::size_t heads, std::size_t n_query,
                                               std::size_t n_image) {
    std::uniform_real_distribution<double> dist(0.01, 1.0);
    std::vector<double> data(layers * heads * n_query * n_image);
    for (std::size_t row = 0; row < data.size() / n_image; ++row) {
        double sum = 0.0;
        for (std::size_t j = 0; j < n_image; ++j) {
            data[row * n_image + j] = dist(rng);
            sum += data[row * n_image + j];
        }
        for (std::size_t j = 0; j < n_image; ++j) data[row * n_image + j] /= sum;
    }
    return catp::AttnTensor(layers, heads, n_query, n_image, std::move(data));
}

// Runs a shell command, captures its stdout, returns the exit status.
struct CommandResult {
    int exit_code;
    std::string stdout_text;
};

inline CommandResult run_command(const std::string& command) {
    std::string with_redirect = command; // caller appends 2>... if needed
    FILE* pipe = ::popen(with_redirect.c_str(), "r");
    if (!pipe) return {-1, {}};
    std::string output;
    char buf[4096];
    std::size_t n;
    while ((n = ::fread(buf, 1, sizeof(buf), pipe)) > 0) output.append(buf, n);
    int status = ::pclose(pipe);
    int code = -1;
    if (WIFEXITED(status)) code = WEXITSTATUS(status);
    return {code, output};
}

} // namespace catp::testutil
