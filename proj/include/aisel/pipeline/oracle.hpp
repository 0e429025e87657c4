#ifndef AISEL_PIPELINE_ORACLE_HPP
#define AISEL_PIPELINE_ORACLE_HPP

#include <sys/socket.h>
#include <sys/types.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <charconv>
#include <cstring>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "aisel/error.hpp"
#include "aisel/json_util.hpp"
#include "aisel/nn/checkpoint.hpp"
#include "aisel/types.hpp"
#include "aisel/uncertainty/classifier.hpp"

namespace aisel::pipeline {

enum class OracleKind { analytic_blob, classifier_backed, external_command };

inline std::string_view to_string(OracleKind k) {
    switch (k) {
    case OracleKind::analytic_blob: return "analytic_blob";
    case OracleKind::classifier_backed: return "classifier_backed";
    case OracleKind::external_command: return "external_command";
    }
    return "?";
}

inline std::optional<OracleKind> oracle_kind_from_string(std::string_view s) {
    for (auto k : {OracleKind::analytic_blob, OracleKind::classifier_backed, OracleKind::external_command}) {
        if (to_string(k) == s) return k;
    }
    return std::nullopt;
}

/// Labeling source for virtual images. Only the parameter of the active kind
/// may be set.
struct OracleSpec {
    OracleKind kind = OracleKind::analytic_blob;
    /// Bright-pixel count threshold; unset means "use the dataset's".
    std::optional<double> threshold;
    /// Level a pixel must exceed to count as bright.
    double bright_level = 0.7;
    std::string checkpoint;
    std::string command;

    void validate() const {
        const bool analytic = kind == OracleKind::analytic_blob;
        if (!analytic && threshold) throw ConfigError("oracle.threshold is only valid for analytic_blob");
        if (kind != OracleKind::classifier_backed && !checkpoint.empty()) {
            throw ConfigError("oracle.checkpoint is only valid for classifier_backed");
        }
        if (kind != OracleKind::external_command && !command.empty()) {
            throw ConfigError("oracle.command is only valid for external_command");
        }
        if (kind == OracleKind::classifier_backed && checkpoint.empty()) {
            throw ConfigError("classifier_backed oracle needs oracle.checkpoint");
        }
        if (kind == OracleKind::external_command && command.empty()) {
            throw ConfigError("external_command oracle needs oracle.command");
        }
    }
};

namespace detail {

/// Counts pixels above `level` per image and thresholds the count.
inline std::vector<int> analytic_labels(const ImageSet& images, double level, double threshold) {
    std::vector<int> out(images.size());
    for (Eigen::Index i = 0; i < images.pixels.rows(); ++i) {
        const auto bright = (images.pixels.row(i).array() > level).count();
        out[static_cast<std::size_t>(i)] = static_cast<double>(bright) > threshold ? 1 : 0;
    }
    return out;
}

inline void append_number(std::string& s, double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    s.append(buf, res.ptr);
}

/// Child process talking over one end of a socketpair wired to its stdin and
/// stdout. Writes use MSG_NOSIGNAL so a dead child surfaces as an error
/// instead of SIGPIPE.
class CommandChannel {
public:
    explicit CommandChannel(const std::string& command) {
        int sv[2];
        if (::socketpair(AF_UNIX, SOCK_STREAM, 0, sv) != 0) {
            throw OracleError(std::string("socketpair failed: ") + std::strerror(errno));
        }
        pid_ = ::fork();
        if (pid_ < 0) {
            ::close(sv[0]);
            ::close(sv[1]);
            throw OracleError(std::string("fork failed: ") + std::strerror(errno));
        }
        if (pid_ == 0) {
            ::close(sv[0]);
            ::dup2(sv[1], STDIN_FILENO);
            ::dup2(sv[1], STDOUT_FILENO);
            if (sv[1] > STDOUT_FILENO) ::close(sv[1]);
            ::execl("/bin/sh", "sh", "-c", command.c_str(), static_cast<char*>(nullptr));
            ::_exit(127);
        }
        ::close(sv[1]);
        fd_ = sv[0];
    }

    CommandChannel(const CommandChannel&) = delete;
    CommandChannel& operator=(const CommandChannel&) = delete;

    ~CommandChannel() {
        if (fd_ >= 0) ::close(fd_);
        if (pid_ > 0) {
            int status = 0;
            ::waitpid(pid_, &status, 0);
        }
    }

    void send_line(const std::string& line) {
        std::size_t done = 0;
        while (done < line.size()) {
            const auto n = ::send(fd_, line.data() + done, line.size() - done, MSG_NOSIGNAL);
            if (n < 0) {
                if (errno == EINTR) continue;
                throw OracleError(std::string("oracle command closed its input: ") + std::strerror(errno));
            }
            done += static_cast<std::size_t>(n);
        }
    }

    std::optional<std::string> read_line() {
        while (true) {
            const auto nl = buffer_.find('\n');
            if (nl != std::string::npos) {
                std::string line = buffer_.substr(0, nl);
                buffer_.erase(0, nl + 1);
                return line;
            }
            char chunk[4096];
            const auto n = ::read(fd_, chunk, sizeof chunk);
            if (n < 0) {
                if (errno == EINTR) continue;
                throw OracleError(std::string("reading oracle reply failed: ") + std::strerror(errno));
            }
            if (n == 0) {
                if (buffer_.empty()) return std::nullopt;
                std::string line = std::move(buffer_);
                buffer_.clear();
                return line;
            }
            buffer_.append(chunk, static_cast<std::size_t>(n));
        }
    }

    /// Closes our end and reaps the child; returns its exit status.
    int finish() {
        ::shutdown(fd_, SHUT_WR);
        // Drain anything left so the child never blocks on a full socket.
        char chunk[4096];
        while (::read(fd_, chunk, sizeof chunk) > 0) {
        }
        ::close(fd_);
        fd_ = -1;
        int status = 0;
        while (::waitpid(pid_, &status, 0) < 0) {
            if (errno != EINTR) throw OracleError("waitpid on oracle command failed");
        }
        pid_ = -1;
        if (WIFEXITED(status)) return WEXITSTATUS(status);
        return 128 + (WIFSIGNALED(status) ? WTERMSIG(status) : 0);
    }

private:
    int fd_ = -1;
    pid_t pid_ = -1;
    std::string buffer_;
};

inline std::optional<int> parse_class(std::string_view s) {
    while (!s.empty() && (s.back() == '\r' || s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    if (s.empty()) return std::nullopt;
    int v = 0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size()) return std::nullopt;
    return v;
}

inline std::vector<int> external_labels(const std::string& command, const ImageSet& images, int classes) {
    CommandChannel ch(command);
    std::vector<int> out;
    out.reserve(images.size());
    for (Eigen::Index i = 0; i < images.pixels.rows(); ++i) {
        std::string line = std::to_string(images.width) + ' ' + std::to_string(images.height);
        for (Eigen::Index k = 0; k < images.pixels.cols(); ++k) {
            line += ' ';
            append_number(line, images.pixels(i, k));
        }
        line += '\n';
        ch.send_line(line);
        const auto reply = ch.read_line();
        if (!reply) throw OracleError("oracle command ended before answering image " + std::to_string(i));
        const auto label = parse_class(*reply);
        if (!label) throw OracleError("oracle protocol error: reply '" + *reply + "' is not an integer class");
        if (*label < 0 || *label >= classes) {
            throw OracleError("oracle replied class " + std::to_string(*label) + " outside [0, " +
                              std::to_string(classes) + ")");
        }
        out.push_back(*label);
    }
    const int status = ch.finish();
    if (status != 0) throw OracleError("oracle command exited with status " + std::to_string(status));
    return out;
}

} // namespace detail

/// Labels `images` with the configured oracle. `dataset_threshold` is the
/// synthetic generator's bright-mass threshold, used when the oracle sets none.
inline std::vector<int> oracle_label(const OracleSpec& oracle, const ImageSet& images, int classes,
                                     std::optional<double> dataset_threshold = std::nullopt) {
    oracle.validate();
    switch (oracle.kind) {
    case OracleKind::analytic_blob: {
        const auto thr = oracle.threshold ? oracle.threshold : dataset_threshold;
        if (!thr) throw OracleError("analytic oracle has no threshold (set oracle.threshold)");
        if (classes != 2) throw OracleError("analytic oracle is binary but the task has " + std::to_string(classes) + " classes");
        return detail::analytic_labels(images, oracle.bright_level, *thr);
    }
    case OracleKind::classifier_backed: {
        if (!std::filesystem::exists(oracle.checkpoint)) {
            throw OracleError("oracle checkpoint '" + oracle.checkpoint + "' does not exist");
        }
        const auto clf = uncertainty::classifier_from_network(nn::load_checkpoint(oracle.checkpoint));
        if (clf.classes != classes) {
            throw OracleError("oracle classifier has " + std::to_string(clf.classes) + " classes, task has " +
                              std::to_string(classes));
        }
        if (images.empty()) return {};
        return uncertainty::predict_labels(clf, images);
    }
    case OracleKind::external_command:
        if (images.empty()) return {};
        return detail::external_labels(oracle.command, images, classes);
    }
    throw OracleError("unknown oracle kind");
}

inline Json to_json(const OracleSpec& o) {
    Json j{{"kind", to_string(o.kind)}, {"bright_level", o.bright_level}, {"checkpoint", o.checkpoint}, {"command", o.command}};
    j["threshold"] = o.threshold ? Json(*o.threshold) : Json(nullptr);
    return j;
}

inline OracleSpec oracle_spec_from_json(const Json& j, const std::string& path) {
    StrictObject o(j, path);
    OracleSpec s;
    const auto kind = o.get<std::string>("kind", std::string(to_string(s.kind)));
    const auto k = oracle_kind_from_string(kind);
    if (!k) throw ConfigError(o.qualified("kind") + ": unknown oracle kind '" + kind + "'");
    s.kind = *k;
    const Json thr = o.get<Json>("threshold", Json(nullptr));
    if (!thr.is_null()) {
        if (!thr.is_number()) throw ConfigError(o.qualified("threshold") + " must be a number or null");
        s.threshold = thr.get<double>();
    }
    s.bright_level = o.get("bright_level", s.bright_level);
    s.checkpoint = o.get("checkpoint", s.checkpoint);
    s.command = o.get("command", s.command);
    o.finish();
    s.validate();
    return s;
}

} // namespace aisel::pipeline

#endif
