#include "leslab/config.hpp"

#include "leslab/io.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

namespace leslab::config {

namespace {

std::string_view trim(std::string_view s)
{
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos)
        return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

template <class T>
T parse_number(std::string_view key, std::string_view v)
{
    T out{};
    const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
    if (res.ec != std::errc() || res.ptr != v.data() + v.size())
        throw ConfigError("invalid value '" + std::string(v) + "' for " + std::string(key));
    return out;
}

bool parse_bool(std::string_view key, std::string_view v)
{
    if (v == "true" || v == "1")
        return true;
    if (v == "false" || v == "0")
        return false;
    throw ConfigError("invalid boolean '" + std::string(v) + "' for " + std::string(key));
}

struct Field {
    std::function<void(RunConfig&, std::string_view key, std::string_view value)> set;
    std::function<std::string(const RunConfig&)> get;
};

template <class T>
Field number(T RunConfig::*outer)
{
    return {[outer](RunConfig& c, std::string_view k, std::string_view v) { c.*outer = parse_number<T>(k, v); },
            [outer](const RunConfig& c) {
                if constexpr (std::is_floating_point_v<T>)
                    return io::fmt(c.*outer);
                else
                    return std::to_string(c.*outer);
            }};
}

template <class S, class T>
Field nested(S RunConfig::*outer, T S::*inner)
{
    return {[outer, inner](RunConfig& c, std::string_view k, std::string_view v) {
                (c.*outer).*inner = parse_number<T>(k, v);
            },
            [outer, inner](const RunConfig& c) {
                if constexpr (std::is_floating_point_v<T>)
                    return io::fmt((c.*outer).*inner);
                else
                    return std::to_string((c.*outer).*inner);
            }};
}

const std::map<std::string, Field, std::less<>>& fields()
{
    static const std::map<std::string, Field, std::less<>> f = {
        {"dns_n", nested(&RunConfig::sim, &sim::SimConfig::n)},
        {"les_n", number(&RunConfig::les_n)},
        {"nu", nested(&RunConfig::sim, &sim::SimConfig::nu)},
        {"cfl", nested(&RunConfig::sim, &sim::SimConfig::cfl)},
        {"box_length", nested(&RunConfig::sim, &sim::SimConfig::box_length)},
        {"initial_energy", nested(&RunConfig::sim, &sim::SimConfig::initial_energy)},
        {"forced_shells", nested(&RunConfig::sim, &sim::SimConfig::forced_shells)},
        {"warmup_time", nested(&RunConfig::sim, &sim::SimConfig::warmup_time)},
        {"sample_every", nested(&RunConfig::sim, &sim::SimConfig::sample_every)},
        {"n_snapshots", nested(&RunConfig::sim, &sim::SimConfig::n_snapshots)},
        {"seed", nested(&RunConfig::sim, &sim::SimConfig::seed)},
        {"progress_every", nested(&RunConfig::sim, &sim::SimConfig::progress_every)},
        {"filter_width_factor", number(&RunConfig::filter_width_factor)},
        {"split_fraction", number(&RunConfig::split_fraction)},
        {"model",
         {[](RunConfig& c, std::string_view, std::string_view v) {
              try {
                  c.model = closures::parse_variant(v);
              } catch (const std::invalid_argument& e) {
                  throw ConfigError(e.what());
              }
          },
          [](const RunConfig& c) { return std::string(closures::to_string(c.model)); }}},
        {"tbnn_width", nested(&RunConfig::arch, &closures::Architecture::tbnn_width)},
        {"tbnn_hidden", nested(&RunConfig::arch, &closures::Architecture::tbnn_hidden)},
        {"conv_width", nested(&RunConfig::arch, &closures::Architecture::conv_width)},
        {"conv_hidden", nested(&RunConfig::arch, &closures::Architecture::conv_hidden)},
        {"gconv_channels", nested(&RunConfig::arch, &closures::Architecture::gconv_channels)},
        {"gconv_inner", nested(&RunConfig::arch, &closures::Architecture::gconv_inner)},
        {"smagorinsky_constant", nested(&RunConfig::arch, &closures::Architecture::smagorinsky_constant)},
        {"epochs", nested(&RunConfig::train, &training::TrainConfig::epochs)},
        {"batch_size", nested(&RunConfig::train, &training::TrainConfig::batch_size)},
        {"learning_rate", nested(&RunConfig::train, &training::TrainConfig::learning_rate)},
        {"beta1", nested(&RunConfig::train, &training::TrainConfig::beta1)},
        {"beta2", nested(&RunConfig::train, &training::TrainConfig::beta2)},
        {"epsilon", nested(&RunConfig::train, &training::TrainConfig::epsilon)},
        {"truncate_closure",
         {[](RunConfig& c, std::string_view k, std::string_view v) { c.truncate_closure = parse_bool(k, v); },
          [](const RunConfig& c) { return std::string(c.truncate_closure ? "true" : "false"); }}},
        {"equivariance_time", number(&RunConfig::equivariance_time)},
        {"aposteriori_turnovers", number(&RunConfig::aposteriori_turnovers)},
        {"kde_max_samples", number(&RunConfig::kde_max_samples)},
        {"out_dir",
         {[](RunConfig& c, std::string_view, std::string_view v) { c.out_dir = std::string(v); },
          [](const RunConfig& c) { return c.out_dir; }}},
    };
    return f;
}

}  // namespace

RunConfig::RunConfig()
{
    sim.n = 64;
    sim.nu = 2e-3;
    sim.warmup_time = 1.0;
    sim.n_snapshots = 30;
    sim.sample_every = 50;
}

void RunConfig::validate() const
{
    try {
        sim.validate();
        train.validate();
        (void)les_grid();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    if (les_n >= sim.n)
        throw ConfigError("dns_n must exceed les_n");
    if (!(filter_width_factor >= 1.0))
        throw ConfigError("filter_width_factor must be at least 1");
    if (!(split_fraction > 0.0 && split_fraction < 1.0))
        throw ConfigError("split_fraction must lie in (0, 1)");
    if (!(equivariance_time > 0.0) || !(aposteriori_turnovers > 0.0))
        throw ConfigError("evaluation horizons must be positive");
    if (kde_max_samples < 2)
        throw ConfigError("kde_max_samples must be at least 2");
    if (arch.tbnn_width < 1 || arch.conv_width < 1 || arch.gconv_channels < 1 || arch.tbnn_hidden < 1 ||
        arch.conv_hidden < 1 || arch.gconv_inner < 0)
        throw ConfigError("network widths and depths must be positive");
    if (out_dir.empty())
        throw ConfigError("out_dir must not be empty");
}

filtering::FilterSpec RunConfig::filter_spec() const
{
    return {filter_width_factor * les_grid().spacing(), 3};
}

sim::LesOptions RunConfig::les_options() const
{
    sim::LesOptions o;
    o.nu = sim.nu;
    o.cfl = sim.cfl;
    o.forced_shells = sim.forced_shells;
    o.truncate_closure = truncate_closure;
    o.progress_every = sim.progress_every;
    return o;
}

void RunConfig::set_seed(std::uint64_t seed)
{
    sim.seed = seed;
    train.seed = seed;
}

std::string RunConfig::to_text() const
{
    std::ostringstream os;
    for (const auto& [key, f] : fields())
        os << key << " = " << f.get(*this) << '\n';
    return os.str();
}

RunConfig parse_text(std::string_view text, RunConfig base)
{
    std::set<std::string, std::less<>> seen;
    int line_no = 0;
    while (!text.empty()) {
        const auto nl = text.find('\n');
        std::string_view line = text.substr(0, nl);
        text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string_view::npos)
            line = line.substr(0, hash);
        line = trim(line);
        if (line.empty())
            continue;
        const auto eq = line.find('=');
        const std::string where = "line " + std::to_string(line_no) + ": ";
        if (eq == std::string_view::npos)
            throw ConfigError(where + "expected 'key = value'");
        const auto key = trim(line.substr(0, eq));
        const auto value = trim(line.substr(eq + 1));
        const auto it = fields().find(key);
        if (it == fields().end())
            throw ConfigError(where + "unknown key '" + std::string(key) + "'");
        if (!seen.insert(std::string(key)).second)
            throw ConfigError(where + "duplicate key '" + std::string(key) + "'");
        if (value.empty())
            throw ConfigError(where + "missing value for '" + std::string(key) + "'");
        try {
            it->second.set(base, key, value);
        } catch (const ConfigError& e) {
            throw ConfigError(where + e.what());
        }
    }
    if (seen.count("seed"))
        base.train.seed = base.sim.seed;
    return base;
}

RunConfig parse_file(const std::filesystem::path& path, RunConfig base)
{
    std::ifstream is(path);
    if (!is)
        throw ConfigError("cannot read config file " + path.string());
    std::ostringstream ss;
    ss << is.rdbuf();
    return parse_text(ss.str(), std::move(base));
}

}  // namespace leslab::config
