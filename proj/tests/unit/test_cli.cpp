#include <doctest.h>

#include <array>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <map>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <unistd.h>

#include "kcd/tensorio.hpp"
#include "support.hpp"

namespace fs = std::filesystem;

namespace {

const std::string kZeroKey(64, '0');
const std::string kZeroNonce(32, '0');

struct Result {
    int code = -1;
    std::string out;
    std::map<std::string, std::string> fields;

    double num(const std::string& key) const { return std::stod(fields.at(key)); }
};

Result run(const std::string& args, const std::string& env = "") {
    const std::string cmd = env + " \"" KCD_CLI_PATH "\" " + args + " 2>/dev/null";
    Result r;
    FILE* pipe = popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    std::array<char, 512> buf{};
    while (fgets(buf.data(), buf.size(), pipe) != nullptr) r.out += buf.data();
    const int status = pclose(pipe);
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    std::istringstream lines(r.out);
    std::string line;
    while (std::getline(lines, line)) {
        const auto eq = line.find('=');
        if (eq != std::string::npos) r.fields[line.substr(0, eq)] = line.substr(eq + 1);
    }
    return r;
}

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() / ("kcd_cli_" + std::to_string(::getpid()) + "_" + std::to_string(counter()++));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string operator/(const std::string& name) const { return (path / name).string(); }
    static int& counter() {
        static int c = 0;
        return c;
    }
};

const std::string golden_dir = KCD_GOLDEN_DIR;

}  // namespace

TEST_CASE("cli: encrypt with check, then decrypt") {
    TempDir tmp;
    const Result enc = run("encrypt --key " + kZeroKey + " --nonce " + kZeroNonce + " --in " + golden_dir +
                           "/plain_3x4.kten --out " + (tmp / "c.kcdm") + " --check");
    REQUIRE(enc.code == 0);
    CHECK(enc.fields.at("nonce") == kZeroNonce);
    CHECK(enc.num("roundtrip_max_abs_error") <= 1e-12);
    CHECK(kcd::io::read_file(tmp / "c.kcdm") == kcd::test::golden("encrypted_zero_3x4_defaults.kcdm"));

    const Result dec = run("decrypt --key " + kZeroKey + " --in " + (tmp / "c.kcdm") + " --out " + (tmp / "x.kten"));
    REQUIRE(dec.code == 0);
    const kcd::Tensor plain = kcd::io::read_tensor(golden_dir + "/plain_3x4.kten");
    const kcd::Tensor back = kcd::io::read_tensor(tmp / "x.kten");
    REQUIRE(back.shape == plain.shape);
    for (std::size_t i = 0; i < plain.values.size(); ++i) CHECK(std::fabs(back.values[i] - plain.values[i]) <= 1e-12);
}

TEST_CASE("cli: csv input and output") {
    TempDir tmp;
    {
        std::FILE* f = std::fopen((tmp / "x.csv").c_str(), "w");
        std::fputs("1.5,2.5,3.5\n-4,5,6e2\n", f);
        std::fclose(f);
    }
    REQUIRE(run("encrypt --key " + kZeroKey + " --nonce " + kZeroNonce + " --in " + (tmp / "x.csv") + " --out " +
                (tmp / "c.kcdm"))
                .code == 0);
    REQUIRE(run("decrypt --key " + kZeroKey + " --in " + (tmp / "c.kcdm") + " --out " + (tmp / "y.csv")).code == 0);
    const kcd::Tensor y = kcd::io::read_csv(tmp / "y.csv");
    CHECK(y.shape == std::vector<std::uint64_t>{2, 3});
    CHECK(y.values[5] == doctest::Approx(600.0).epsilon(1e-14));
}

TEST_CASE("cli: generated nonces differ") {
    TempDir tmp;
    const std::string base = "encrypt --key " + kZeroKey + " --gen-nonce --in " + golden_dir + "/plain_3x4.kten --out ";
    const Result a = run(base + (tmp / "a.kcdm"));
    const Result b = run(base + (tmp / "b.kcdm"));
    REQUIRE(a.code == 0);
    REQUIRE(b.code == 0);
    CHECK(a.fields.at("nonce") != b.fields.at("nonce"));
    CHECK(kcd::io::read_file(tmp / "a.kcdm") != kcd::io::read_file(tmp / "b.kcdm"));
}

TEST_CASE("cli: mask matches the golden files") {
    TempDir tmp;
    REQUIRE(run("mask --key " + kZeroKey + " --nonce " + kZeroNonce + " --shape 3,4 --out " + (tmp / "m.kten")).code == 0);
    CHECK(kcd::io::read_file(tmp / "m.kten") == kcd::test::golden("mask_zero_3x4_defaults.kten"));
    REQUIRE(run("mask --key " + kZeroKey + " --nonce " + kZeroNonce +
                " --shape 2,4 --map logistic --graph er --p 0.2 --out " + (tmp / "m2.kten"))
                .code == 0);
    CHECK(kcd::io::read_file(tmp / "m2.kten") == kcd::test::golden("mask_zero_2x4_logistic_er.kten"));
}

TEST_CASE("cli: environment key wins over the flag") {
    TempDir tmp;
    const std::string other(64, 'a');
    REQUIRE(run("mask --key " + other + " --nonce " + kZeroNonce + " --shape 3,4 --out " + (tmp / "m.kten"),
                "KCD_KEY=" + kZeroKey)
                .code == 0);
    CHECK(kcd::io::read_file(tmp / "m.kten") == kcd::test::golden("mask_zero_3x4_defaults.kten"));
}

TEST_CASE("cli: diagnose benchmarks") {
    const std::string base = "diagnose --key " + kZeroKey + " --nonce " + kZeroNonce + " --d 1 --steps 10000 --sigma 0 ";
    const Result logistic = run(base + "--map logistic --r 4");
    REQUIRE(logistic.code == 0);
    CHECK(std::fabs(logistic.num("lambda_hat") - std::log(2.0)) < 0.05);
    const Result cat = run(base + "--map cat");
    REQUIRE(cat.code == 0);
    CHECK(std::fabs(cat.num("lambda_hat") - std::log((3.0 + std::sqrt(5.0)) / 2.0)) < 0.05);
    const Result tent = run(base + "--map tent --mu 0.5");
    REQUIRE(tent.code == 0);
    CHECK(std::fabs(tent.num("lambda_hat") - std::log(2.0)) < 0.05);
    CHECK(tent.fields.at("steps") == "10000");
    CHECK(tent.fields.at("synchronized") == "false");
}

TEST_CASE("cli: diagnose writes per-step logs and flags non-chaotic systems") {
    TempDir tmp;
    const Result r = run("diagnose --key " + kZeroKey + " --nonce " + kZeroNonce + " --d 1 --steps 2000 --map logistic --r 3.96027 --csv " +
                         (tmp / "logs.csv"));
    CHECK(r.code == 6);
    CHECK(r.num("lambda_hat") <= 0.0);
    CHECK(kcd::io::read_csv(tmp / "logs.csv").values.size() == 1990);
}

TEST_CASE("cli: inspect") {
    TempDir tmp;
    const Result r = run("inspect --key " + kZeroKey + " --nonce " + kZeroNonce + " --d 4 --adjacency-csv " +
                         (tmp / "a.csv") + " --weights-csv " + (tmp / "w.csv"));
    REQUIRE(r.code == 0);
    CHECK(r.fields.at("map") == "logistic");
    CHECK(r.fields.at("graph") == "ws");
    CHECK(r.fields.at("k") == "2");
    const kcd::Tensor a = kcd::io::read_csv(tmp / "a.csv");
    CHECK(a.values == std::vector<double>{0, 1, 0, 1, 1, 0, 1, 0, 0, 1, 0, 1, 1, 0, 1, 0});
    CHECK(kcd::io::read_csv(tmp / "w.csv").shape == std::vector<std::uint64_t>{4, 4});

    const Result c = run("inspect --container " + golden_dir + "/encrypted_zero_3x4_defaults.kcdm");
    REQUIRE(c.code == 0);
    CHECK(c.fields.at("fingerprint") == kcd::test::fixture()["fingerprint_defaults"].get<std::string>());
    CHECK(c.fields.at("fingerprint_ok") == "true");
    CHECK(c.fields.at("shape") == "3,4");
}

TEST_CASE("cli: demo") {
    TempDir tmp;
    kcd::Tensor x{{8, 16}, std::vector<double>(128)};
    for (std::size_t i = 0; i < x.values.size(); ++i) x.values[i] = std::sin(double(i));
    kcd::io::write_tensor(tmp / "x.kten", x);
    const Result r = run("demo --key " + kZeroKey + " --in " + (tmp / "x.kten"));
    REQUIRE(r.code == 0);
    CHECK(r.num("correct_key_output_error") <= 1e-9);
    CHECK(r.num("wrong_key_output_error") > 0.1);

    kcd::io::write_tensor(tmp / "z.kten", kcd::Tensor{{2, 5}, std::vector<double>(10, 0.0)});
    REQUIRE(run("demo --key " + kZeroKey + " --in " + (tmp / "z.kten") + " --out " + (tmp / "y.kten")).code == 0);
    const kcd::Tensor y = kcd::io::read_tensor(tmp / "y.kten");
    for (std::size_t i = 0; i < y.values.size(); ++i) {
        CHECK(std::fabs(y.values[i] - (0.1 * double(i % 5) - 0.2)) <= 1e-9);
    }
}

TEST_CASE("cli: exit codes") {
    TempDir tmp;
    const std::string plain = golden_dir + "/plain_3x4.kten";
    CHECK(run("encrypt --key abc --nonce " + kZeroNonce + " --in " + plain + " --out " + (tmp / "c")).code == 2);
    CHECK(run("encrypt --nonce " + kZeroNonce + " --in " + plain + " --out " + (tmp / "c")).code == 2);
    CHECK(run("encrypt --key " + kZeroKey + " --in " + plain + " --out " + (tmp / "c")).code == 2);
    CHECK(run("encrypt --key " + kZeroKey + " --nonce " + kZeroNonce + " --map henon --in " + plain + " --out " + (tmp / "c")).code == 2);
    CHECK(run("encrypt --key " + kZeroKey + " --nonce " + kZeroNonce + " --r 5 --in " + plain + " --out " + (tmp / "c")).code == 2);
    CHECK(run("bogus").code == 2);
    CHECK(run("encrypt --key " + kZeroKey + " --nonce " + kZeroNonce + " --in " + (tmp / "missing.kten") + " --out " + (tmp / "c")).code == 3);
    CHECK(run("decrypt --key " + kZeroKey + " --in " + plain + " --out " + (tmp / "x")).code == 3);

    kcd::io::write_tensor(tmp / "one.kten", kcd::Tensor{{1}, {1.0}});
    CHECK(run("encrypt --key " + kZeroKey + " --nonce " + kZeroNonce + " --map logistic --r 3.96027 --verify-chaos --in " +
              (tmp / "one.kten") + " --out " + (tmp / "c"))
              .code == 4);

    auto bytes = kcd::test::golden("encrypted_zero_3x4_defaults.kcdm");
    bytes[22] ^= 1;  // first fingerprint byte
    kcd::io::write_file(tmp / "bad.kcdm", bytes);
    CHECK(run("decrypt --key " + kZeroKey + " --in " + (tmp / "bad.kcdm") + " --out " + (tmp / "x.kten")).code == 5);
}
