#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <chrono>
#include <filesystem>

#include "constellation/agent/executor.hpp"
#include "constellation/error.hpp"

namespace constellation::agent {

namespace fs = std::filesystem;

namespace {

bool under(const fs::path& p, const fs::path& root) {
    auto rel = p.lexically_relative(root);
    return !rel.empty() && *rel.begin() != "..";
}

}  // namespace

ShellExecutor::ShellExecutor(std::string workdir, std::vector<std::string> allowed_roots, double timeout_s,
                             Json telemetry)
    : timeout_(timeout_s), telemetry_(std::move(telemetry)) {
    std::error_code ec;
    auto dir = fs::canonical(workdir, ec);
    if (ec || !fs::is_directory(dir)) throw Error(ErrorCode::IllegalField, "workdir '" + workdir + "' does not exist");
    bool ok = false;
    for (const auto& r : allowed_roots) {
        auto root = fs::weakly_canonical(r, ec);
        if (!ec && under(dir, root)) ok = true;
    }
    if (!ok) throw Error(ErrorCode::IllegalField, "workdir '" + workdir + "' is outside the allowed roots");
    workdir_ = dir.string();
}

ExecResult ShellExecutor::execute(const aip::Action& a) {
    ExecResult r;
    if (a.function == "SYS_INFO") {
        r.value = telemetry_;
        return r;
    }
    if (a.function != "EXEC_CLI") throw Error(ErrorCode::NoScriptEntry, "no tool for function '" + a.function + "'");
    auto line = a.arguments.value("command", "");

    int out[2], err[2];
    if (pipe(out) != 0 || pipe(err) != 0) throw Error(ErrorCode::DispatchError, "pipe failed");
    pid_t pid = fork();
    if (pid < 0) throw Error(ErrorCode::DispatchError, "fork failed");
    if (pid == 0) {
        setpgid(0, 0);
        dup2(out[1], STDOUT_FILENO);
        dup2(err[1], STDERR_FILENO);
        close(out[0]);
        close(err[0]);
        int devnull = open("/dev/null", O_RDONLY);
        if (devnull >= 0) dup2(devnull, STDIN_FILENO);
        if (chdir(workdir_.c_str()) != 0) _exit(126);
        execl("/bin/sh", "sh", "-c", line.c_str(), static_cast<char*>(nullptr));
        _exit(127);
    }
    close(out[1]);
    close(err[1]);

    std::string so, se;
    pollfd fds[2] = {{out[0], POLLIN, 0}, {err[0], POLLIN, 0}};
    int open_fds = 2;
    bool timed_out = false;
    const auto deadline = std::chrono::steady_clock::now() + std::chrono::duration<double>(timeout_);
    char buf[4096];
    while (open_fds > 0) {
        auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - std::chrono::steady_clock::now());
        if (left.count() <= 0) {
            timed_out = true;
            break;
        }
        if (poll(fds, 2, static_cast<int>(left.count())) < 0) break;
        for (int i = 0; i < 2; ++i) {
            if (fds[i].fd < 0 || !(fds[i].revents & (POLLIN | POLLHUP))) continue;
            auto n = read(fds[i].fd, buf, sizeof buf);
            if (n <= 0) {
                close(fds[i].fd);
                fds[i].fd = -1;
                --open_fds;
            } else {
                (i == 0 ? so : se).append(buf, static_cast<std::size_t>(n));
            }
        }
    }
    if (timed_out) kill(-pid, SIGKILL);
    for (auto& f : fds)
        if (f.fd >= 0) close(f.fd);
    int status = 0;
    waitpid(pid, &status, 0);
    if (timed_out) throw Error(ErrorCode::Timeout, "'" + line + "' ran longer than " + std::to_string(timeout_) + " s");

    int code = WIFEXITED(status) ? WEXITSTATUS(status) : 128 + WTERMSIG(status);
    r.value = Json{{"exit_code", code}, {"stdout", so}, {"stderr", se}};
    if (code != 0) {
        r.status = "ERROR";
        r.error = "exit code " + std::to_string(code);
    }
    return r;
}

}  // namespace constellation::agent
