#include <doctest.h>

#include <filesystem>

#include "constellation/agent/executor.hpp"
#include "constellation/error.hpp"

using namespace constellation;
using namespace constellation::agent;
namespace fs = std::filesystem;

namespace {

aip::Action cli(const std::string& cmd) {
    return {"a1", "EXEC_CLI", Json{{"command", cmd}}};
}

struct Sandbox {
    fs::path root = fs::temp_directory_path() / "constellation-shell-test";
    Sandbox() { fs::create_directories(root / "work"); }
    ~Sandbox() { fs::remove_all(root); }
};

}  // namespace

TEST_CASE("shell executor captures stdout, stderr and the exit code") {
    Sandbox box;
    ShellExecutor ex((box.root / "work").string(), {box.root.string()}, 5.0, Json{{"os", "linux"}});
    auto r = ex.execute(cli("echo hi; echo oops >&2"));
    CHECK(r.status == "OK");
    CHECK(r.value["stdout"] == "hi\n");
    CHECK(r.value["stderr"] == "oops\n");
    auto bad = ex.execute(cli("exit 3"));
    CHECK(bad.status == "ERROR");
    CHECK(bad.value["exit_code"] == 3);
    CHECK(ex.execute({"a2", "SYS_INFO", Json::object()}).value["os"] == "linux");
}

TEST_CASE("shell executor runs inside its working directory") {
    Sandbox box;
    ShellExecutor ex((box.root / "work").string(), {box.root.string()}, 5.0, Json::object());
    ex.execute(cli("echo data > out.txt"));
    CHECK(fs::exists(box.root / "work" / "out.txt"));
}

TEST_CASE("shell executor refuses directories outside the allowlist and kills slow commands") {
    Sandbox box;
    CHECK_THROWS_AS(ShellExecutor("/", {box.root.string()}, 5.0, Json::object()), Error);
    ShellExecutor ex((box.root / "work").string(), {box.root.string()}, 0.2, Json::object());
    try {
        ex.execute(cli("sleep 5"));
        FAIL("no timeout");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::Timeout);
    }
}
