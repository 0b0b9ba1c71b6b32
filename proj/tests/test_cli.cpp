#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

namespace fs = std::filesystem;

namespace {

struct Run
{
    int code = -1;
    std::string out;
    std::string err;
};

std::string slurp(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

class Workdir
{
public:
    explicit Workdir(const std::string& name) : dir_(fs::temp_directory_path() / ("bdcs_cli_" + name))
    {
        fs::remove_all(dir_);
        fs::create_directories(dir_);
    }
    ~Workdir() { fs::remove_all(dir_); }

    fs::path path(const std::string& name) const { return dir_ / name; }

    void write(const std::string& name, const std::string& text) const
    {
        std::ofstream(path(name), std::ios::binary) << text;
    }

    Run run(const std::string& args) const
    {
        const std::string cmd = "cd '" + dir_.string() + "' && '" BDCS_CLI_PATH "' " + args + " > stdout.txt 2> stderr.txt";
        const int status = std::system(cmd.c_str());
        Run r;
        r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
        r.out = slurp(path("stdout.txt"));
        r.err = slurp(path("stderr.txt"));
        return r;
    }

private:
    fs::path dir_;
};

const char* kSmallSystem = R"([system]
n_subcarriers = 128
n_groups = 12
channel_length = 16
sparsity = 2
n_antennas = 2
)";

std::size_t line_count(const std::string& s) { return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n')); }

} // namespace

TEST_CASE("help and verification")
{
    Workdir w("verify");
    Run r = w.run("--help");
    CHECK(r.code == 0);
    CHECK(r.out.find("design-pilots") != std::string::npos);
    CHECK(r.out.find("sweep") != std::string::npos);

    r = w.run("verify");
    CHECK(r.code == 0);
    CHECK(r.out.find("FAIL") == std::string::npos);
    CHECK(line_count(r.out) == 8);
    CHECK(w.run("--verify").code == 0);

    r = w.run("--inject-offset-sign-fault verify");
    CHECK(r.code == 1);
    CHECK(r.err.find("index_consistency") != std::string::npos);
}

TEST_CASE("missing configuration")
{
    Workdir w("missing");
    Run r = w.run("sweep --config nope.ini");
    CHECK(r.code == 2);
    CHECK(r.err.find("nope.ini") != std::string::npos);
    CHECK_FALSE(fs::exists(w.path("results.csv")));
    CHECK_FALSE(fs::exists(w.path("results.csv.manifest")));
    CHECK(w.run("design-pilots").code == 2);
    CHECK(w.run("frobnicate").code == 2);
}

TEST_CASE("design-pilots writes the pattern and its coherence trace")
{
    Workdir w("design");
    w.write("run.ini", kSmallSystem);
    Run r = w.run("design-pilots --config run.ini --scheme equidistant --out eq.txt");
    CHECK(r.code == 0);
    CHECK(fs::exists(w.path("eq.txt")));
    CHECK(line_count(slurp(w.path("eq.txt.mu.csv"))) == 2);  // header + one value

    r = w.run("design-pilots --config run.ini --scheme bdso --iterations 40 --seed 3 --out a.txt");
    CHECK(r.code == 0);
    CHECK(w.run("design-pilots --config run.ini --scheme bdso --iterations 40 --seed 3 --out b.txt").code == 0);
    CHECK(slurp(w.path("a.txt")) == slurp(w.path("b.txt")));
    CHECK(slurp(w.path("a.txt.mu.csv")) == slurp(w.path("b.txt.mu.csv")));
    CHECK(line_count(slurp(w.path("a.txt.mu.csv"))) == 42);

    CHECK(w.run("design-pilots --config run.ini --scheme random").code == 2);
}

TEST_CASE("sweep writes deterministic CSV and manifest")
{
    Workdir w("sweep");
    w.write("run.ini", std::string(kSmallSystem) + R"(
[experiment]
sweep_variable = snr
sweep_values = 0, 20
trials = 3
methods = ls, bsomp
pilot_iterations = 20
seed = 9
[output]
results = first.csv
)");
    Run r = w.run("sweep --config run.ini");
    REQUIRE(r.code == 0);
    const std::string first = slurp(w.path("first.csv"));
    // header + 2 values x 3 trials x (LS, BSOMP, BSOMP-li)
    CHECK(line_count(first) == 1 + 2 * 3 * 3);
    CHECK(first.rfind("method,seed,snr_db,doppler_norm,n_antennas,K,nmse_db,support_hit,runtime_ms\n", 0) == 0);
    const std::string manifest = slurp(w.path("first.csv.manifest"));
    CHECK(manifest.find("sweep_variable = snr") != std::string::npos);
    CHECK(manifest.find("mu =") != std::string::npos);

    fs::rename(w.path("first.csv"), w.path("kept.csv"));
    CHECK(w.run("sweep --config run.ini --threads 3").code == 0);
    CHECK(slurp(w.path("first.csv")) == slurp(w.path("kept.csv")));
}

TEST_CASE("iteration sweep writes the trace CSV")
{
    Workdir w("iter");
    w.write("run.ini", std::string(kSmallSystem) + R"(
[experiment]
sweep_variable = iterations
sweep_values = 0, 5, 25
trials = 2
)");
    REQUIRE(w.run("sweep --config run.ini").code == 0);
    const std::string csv = slurp(w.path("results.csv"));
    CHECK(csv.rfind("scheme,seed,iterations,mu\n", 0) == 0);
    CHECK(line_count(csv) == 1 + 2 * 3);
}

TEST_CASE("configuration and feasibility errors")
{
    Workdir w("errors");
    w.write("bad.ini", "[experiment]\nsweep_variable = velocity\n");
    Run r = w.run("sweep --config bad.ini");
    CHECK(r.code == 2);
    CHECK(r.err.find("sweep_variable") != std::string::npos);
    CHECK(r.err.find(":2:") != std::string::npos);

    w.write("packed.ini", "[system]\nn_subcarriers = 64\nn_groups = 24\n");
    r = w.run("sweep --config packed.ini");
    CHECK(r.code == 3);
    CHECK_FALSE(fs::exists(w.path("results.csv")));
    CHECK(w.run("design-pilots --config packed.ini").code == 3);

    w.write("k.ini", "[system]\nsparsity = 51\n");
    CHECK(w.run("sweep --config k.ini").code == 3);
}
