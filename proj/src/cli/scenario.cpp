#include "scenario.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "lqrvol/grids.hpp"
#include "lqrvol/reference.hpp"

namespace lqrvol::cli
{
namespace
{
std::string position(const YAML::Mark& mark)
{
    if (mark.is_null()) return "";
    return std::to_string(mark.line + 1) + ":" + std::to_string(mark.column + 1) + ": ";
}

std::string prefix(const std::shared_ptr<const std::string>& file, const YAML::Mark& mark)
{
    return *file + ":" + position(mark);
}

}  // namespace

Section::Section(YAML::Node node, std::string path, std::shared_ptr<const std::string> file)
    : node_(std::move(node)), path_(std::move(path)), file_(std::move(file))
{
    if (!node_.IsMap()) throw ConfigError(prefix(file_, node_.Mark()) + (path_.empty() ? "scenario" : path_) +
                                          ": expected a mapping");
}

std::string Section::key_path(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

void Section::fail(const std::string& key, const std::string& message) const
{
    YAML::Mark mark = node_.Mark();
    if (node_[key]) mark = node_[key].Mark();
    throw ConfigError(prefix(file_, mark) + key_path(key) + ": " + message);
}

bool Section::has(const std::string& key) const { return bool(node_[key]) && !node_[key].IsNull(); }

YAML::Node Section::required(const std::string& key) const
{
    if (!has(key)) fail(key, "required key is missing");
    return node_[key];
}

Section Section::child(const std::string& key) const
{
    const YAML::Node n = required(key);
    if (!n.IsMap()) fail(key, "expected a mapping");
    return Section(n, key_path(key), file_);
}

std::optional<Section> Section::optional_child(const std::string& key) const
{
    if (!has(key)) return std::nullopt;
    return child(key);
}

std::vector<Section> Section::children(const std::string& key) const
{
    const YAML::Node n = required(key);
    if (!n.IsSequence()) fail(key, "expected a list of mappings");
    std::vector<Section> out;
    for (std::size_t i = 0; i < n.size(); ++i) out.emplace_back(n[i], key_path(key) + "[" + std::to_string(i) + "]", file_);
    return out;
}

double Section::number(const std::string& key) const
{
    const YAML::Node n = required(key);
    double v = 0;
    if (!n.IsScalar() || !YAML::convert<double>::decode(n, v)) fail(key, "expected a number");
    if (!std::isfinite(v)) fail(key, "expected a finite number");
    return v;
}

double Section::number_or(const std::string& key, double fallback) const
{
    return has(key) ? number(key) : fallback;
}

long Section::integer(const std::string& key) const
{
    const YAML::Node n = required(key);
    long v = 0;
    if (!n.IsScalar() || !YAML::convert<long>::decode(n, v)) fail(key, "expected an integer");
    return v;
}

long Section::integer_or(const std::string& key, long fallback) const { return has(key) ? integer(key) : fallback; }

std::string Section::text(const std::string& key) const
{
    const YAML::Node n = required(key);
    if (!n.IsScalar()) fail(key, "expected a string");
    return n.Scalar();
}

std::string Section::text_or(const std::string& key, const std::string& fallback) const
{
    return has(key) ? text(key) : fallback;
}

bool Section::flag_or(const std::string& key, bool fallback) const
{
    if (!has(key)) return fallback;
    bool v = false;
    if (!node_[key].IsScalar() || !YAML::convert<bool>::decode(node_[key], v)) fail(key, "expected true or false");
    return v;
}

VectorXd Section::vector(const std::string& key) const
{
    const YAML::Node n = required(key);
    if (!n.IsSequence()) fail(key, "expected a list of numbers");
    VectorXd v(Index(n.size()));
    for (std::size_t i = 0; i < n.size(); ++i) {
        double x = 0;
        if (!n[i].IsScalar() || !YAML::convert<double>::decode(n[i], x) || !std::isfinite(x))
            fail(key, "entry " + std::to_string(i) + " is not a finite number");
        v(Index(i)) = x;
    }
    return v;
}

MatrixXd Section::matrix(const std::string& key) const
{
    const YAML::Node n = required(key);
    if (!n.IsSequence() || n.size() == 0) fail(key, "expected a non-empty list of rows");
    const std::size_t rows = n.size();
    std::size_t cols = 0;
    MatrixXd m;
    for (std::size_t i = 0; i < rows; ++i) {
        if (!n[i].IsSequence()) fail(key, "row " + std::to_string(i) + " is not a list");
        if (i == 0) {
            cols = n[i].size();
            m.resize(Index(rows), Index(cols));
        }
        if (n[i].size() != cols) fail(key, "rows have different lengths");
        for (std::size_t j = 0; j < cols; ++j) {
            double x = 0;
            if (!n[i][j].IsScalar() || !YAML::convert<double>::decode(n[i][j], x) || !std::isfinite(x))
                fail(key, "entry (" + std::to_string(i) + ", " + std::to_string(j) + ") is not a finite number");
            m(Index(i), Index(j)) = x;
        }
    }
    return m;
}

std::vector<double> Section::grid(const std::string& key) const
{
    const YAML::Node n = required(key);
    if (n.IsSequence()) {
        const VectorXd v = vector(key);
        return {v.data(), v.data() + v.size()};
    }
    if (!n.IsMap() || n.size() != 1) fail(key, "expected a list or one of logspace/linspace/geomspace");
    const Section spec(n, key_path(key), file_);
    for (const char* kind : {"logspace", "linspace", "geomspace"}) {
        if (!spec.has(kind)) continue;
        const VectorXd a = spec.vector(kind);
        if (a.size() != 3 || a(2) < 1 || a(2) != std::floor(a(2))) spec.fail(kind, "expected [start, stop, count]");
        const int count = int(a(2));
        try {
            if (std::string(kind) == "logspace") return logspace(a(0), a(1), count);
            if (std::string(kind) == "linspace") return linspace(a(0), a(1), count);
            return geomspace(a(0), a(1), count);
        } catch (const InvalidParameter& e) {
            spec.fail(kind, e.what());
        }
    }
    fail(key, "expected a list or one of logspace/linspace/geomspace");
}

Section Scenario::section() const
{
    return Section(root, "", std::make_shared<const std::string>(source.string()));
}

namespace
{
void apply_override(YAML::Node& root, const std::string& text)
{
    const auto eq = text.find('=');
    if (eq == std::string::npos || eq == 0) throw ConfigError("override '" + text + "': expected key.path=value");
    const std::string path = text.substr(0, eq);
    YAML::Node value;
    try {
        value = YAML::Load(text.substr(eq + 1));
    } catch (const YAML::Exception& e) {
        throw ConfigError("override '" + text + "': " + e.msg);
    }

    std::vector<std::string> keys;
    std::stringstream ss(path);
    for (std::string k; std::getline(ss, k, '.');) {
        if (k.empty()) throw ConfigError("override '" + text + "': empty key segment");
        keys.push_back(k);
    }
    // yaml-cpp nodes are handles, so walking by assignment would rebind;
    // build the chain explicitly instead.
    std::vector<YAML::Node> chain{root};
    for (std::size_t i = 0; i + 1 < keys.size(); ++i) {
        YAML::Node next = chain.back()[keys[i]];
        if (next && !next.IsNull() && !next.IsMap())
            throw ConfigError("override '" + text + "': " + keys[i] + " is not a mapping");
        if (!next || next.IsNull()) {
            chain.back()[keys[i]] = YAML::Node(YAML::NodeType::Map);
            next = chain.back()[keys[i]];
        }
        chain.push_back(next);
    }
    chain.back()[keys.back()] = value;
}

}  // namespace

Scenario load_scenario(const std::filesystem::path& file, const std::vector<std::string>& overrides)
{
    Scenario sc;
    sc.source = file;
    std::ifstream in(file);
    if (!in) throw ConfigError(file.string() + ": cannot open scenario file");
    try {
        sc.root = YAML::Load(in);
    } catch (const YAML::ParserException& e) {
        throw ConfigError(file.string() + ":" + position(e.mark) + e.msg);
    }
    if (!sc.root || sc.root.IsNull()) throw ConfigError(file.string() + ": scenario file is empty");
    if (!sc.root.IsMap()) throw ConfigError(file.string() + ":" + position(sc.root.Mark()) + "expected a mapping");
    for (const auto& o : overrides) apply_override(sc.root, o);

    const Section root = sc.section();
    sc.name = root.text("name");
    if (sc.name.empty() || sc.name.find_first_of("/\\") != std::string::npos)
        root.fail("name", "must be a non-empty file-name-safe string");
    sc.experiment = root.text("experiment");
    bool known = false;
    for (const auto& info : experiment_registry()) known = known || info.name == sc.experiment;
    if (!known) root.fail("experiment", "unknown experiment '" + sc.experiment + "' (see `lqrvol list`)");
    const long seed = root.integer_or("seed", 0);
    if (seed < 0) root.fail("seed", "must be nonnegative");
    sc.seed = std::uint64_t(seed);
    const long threads = root.integer_or("threads", 1);
    if (threads < 0) root.fail("threads", "must be nonnegative");
    sc.threads = unsigned(threads);
    return sc;
}

NoiseSpec<double> parse_noise(const Section& parent, Index dim)
{
    if (!parent.has("noise")) return NoiseSpec<double>::none(dim);
    const YAML::Node n = parent.node()["noise"];
    if (n.IsScalar() && n.Scalar() == "none") return NoiseSpec<double>::none(dim);
    const Section noise = parent.child("noise");
    try {
        if (noise.has("covariance")) {
            const MatrixXd c = noise.matrix("covariance");
            if (c.rows() != dim || c.cols() != dim) noise.fail("covariance", "must be " + std::to_string(dim) + " x " + std::to_string(dim));
            return NoiseSpec<double>::gaussian(c);
        }
        if (noise.has("diagonal")) {
            const VectorXd v = noise.vector("diagonal");
            if (v.size() != dim) noise.fail("diagonal", "must have " + std::to_string(dim) + " entries");
            return NoiseSpec<double>::gaussian_diagonal(v);
        }
    } catch (const InvalidParameter& e) {
        noise.fail(noise.has("covariance") ? "covariance" : "diagonal", e.what());
    }
    parent.fail("noise", "expected none, {covariance: ...} or {diagonal: ...}");
}

MarketInstance<double> parse_system(const Section& root)
{
    if (root.has("system")) {
        const Section s = root.child("system");
        const MatrixXd A = s.matrix("A");
        const VectorXd b = s.vector("b");
        const MatrixXd Q = s.matrix("Q");
        const auto noise = parse_noise(s, A.rows());
        try {
            auto sys = LqrSystem<double>::create(A, b, noise, Q, s.number("r"), s.number("gamma"));
            std::vector<std::string> labels;
            for (Index i = 0; i < sys.dim(); ++i) labels.push_back("x" + std::to_string(i));
            return {std::move(sys), std::move(labels), std::nullopt};
        } catch (const InvalidParameter& e) {
            s.fail(e.parameter(), e.what());
        }
    }
    if (!root.has("market")) root.fail("market", "a market or system section is required");
    const Section m = root.child("market");
    const std::string preset = m.text_or("preset", "reference");
    if (preset != "reference" && preset != "none") m.fail("preset", "expected reference or none");
    const bool ref = preset == "reference";

    MarketParams<double> p = ref ? reference_market_params<double>() : MarketParams<double>{};
    auto coefficient = [&](const char* key, double fallback) {
        if (!ref && !m.has(key)) m.fail(key, "required key is missing");
        return m.number_or(key, fallback);
    };
    p.beta = coefficient("beta", p.beta);
    p.sigma = coefficient("sigma", p.sigma);
    p.phi1 = coefficient("phi1", p.phi1);
    p.phi2 = coefficient("phi2", p.phi2);
    const MatrixXd Q = m.has("Q") || !ref ? m.matrix("Q") : reference_market_Q<double>();
    NoiseSpec<double> noise = NoiseSpec<double>::none(3);
    if (m.has("noise"))
        noise = parse_noise(m, 3);
    else if (ref)
        noise = reference_market<double>().system.noise();
    const double r = m.number_or("r", 0.01);
    const double gamma = ref ? m.number_or("gamma", 0.5) : m.number("gamma");
    try {
        return build_price_taking_market(p, noise, Q, r, gamma);
    } catch (const InvalidParameter& e) {
        m.fail(e.parameter(), e.what());
    }
}

VectorXd parse_x0(const Section& root, Index dim)
{
    if (!root.has("x0")) {
        if (dim == 3) return reference_market_x0<double>();
        root.fail("x0", "required key is missing");
    }
    const VectorXd x0 = root.vector("x0");
    if (x0.size() != dim) root.fail("x0", "must have " + std::to_string(dim) + " entries");
    return x0;
}

SimConfig parse_sim(const Section& root, const Scenario& scenario)
{
    SimConfig cfg;
    cfg.seed = scenario.seed;
    cfg.threads = scenario.threads;
    if (auto s = root.optional_child("sim")) {
        cfg.n_paths = s->integer_or("n_paths", cfg.n_paths);
        if (s->has("horizon")) {
            const YAML::Node h = s->node()["horizon"];
            if (!(h.IsScalar() && h.Scalar() == "auto")) cfg.horizon = s->integer("horizon");
        }
        cfg.truncation_eps = s->number_or("truncation_eps", cfg.truncation_eps);
        cfg.keep_paths = s->integer_or("keep_paths", 0);
        const long stream = s->integer_or("stream", 0);
        if (stream < 0) s->fail("stream", "must be nonnegative");
        cfg.stream = std::uint64_t(stream);
        try {
            cfg.validate();
        } catch (const InvalidParameter& e) {
            s->fail(e.parameter(), e.what());
        }
    }
    return cfg;
}

MarketSpecPA<double> parse_nash_market(const Section& root)
{
    const Section m = root.child("nash_market");
    MarketSpecPA<double> spec;
    auto players = [&](const char* key, ProsumerKind kind, std::vector<ProsumerSpec<double>>& out) {
        if (!m.has(key)) return;
        for (const Section& p : m.children(key)) {
            ProsumerSpec<double> ps{kind, p.matrix("A"), p.matrix("Q")};
            try {
                ps.validate(p.path());
            } catch (const InvalidParameter& e) {
                p.fail("A", e.what());
            }
            out.push_back(std::move(ps));
        }
    };
    players("consumers", ProsumerKind::consumer, spec.consumers);
    players("producers", ProsumerKind::producer, spec.producers);
    if (spec.players() == 0) m.fail("consumers", "the market needs at least one prosumer");
    spec.kappa = m.number("kappa");
    spec.zeta = m.number_or("zeta", 0);
    spec.price_slope = m.number_or("price_slope", 1);
    spec.r = m.number_or("r", 1);
    spec.gamma = m.number("gamma");
    const Index nm = spec.market_dim();
    const auto noise = parse_noise(m, nm);
    spec.noise_covariance = noise.covariance();
    try {
        (void)assemble_aggregate(spec);
    } catch (const InvalidParameter& e) {
        m.fail(e.parameter(), e.what());
    }
    return spec;
}

}  // namespace lqrvol::cli
