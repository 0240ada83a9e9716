#include "oanade/combinatorics.hpp"

#include <algorithm>
#include <fstream>
#include <functional>
#include <limits>
#include <numeric>
#include <set>
#include <sstream>

#include "oanade/errors.hpp"
#include "oanade/io_util.hpp"

namespace oanade {

ObservedSet::ObservedSet(std::size_t dimension) : dimension_(dimension) {}

ObservedSet::ObservedSet(std::size_t dimension, std::vector<std::size_t> members)
    : dimension_(dimension), members_(std::move(members)) {
    std::sort(members_.begin(), members_.end());
    if (std::adjacent_find(members_.begin(), members_.end()) != members_.end()) {
        throw InvalidArgument("ObservedSet: duplicate index");
    }
    if (!members_.empty() && members_.back() >= dimension_) throw InvalidArgument("ObservedSet: index out of range");
}

ObservedSet ObservedSet::full(std::size_t dimension) {
    std::vector<std::size_t> all(dimension);
    std::iota(all.begin(), all.end(), std::size_t{0});
    return ObservedSet(dimension, std::move(all));
}

ObservedSet ObservedSet::from_indicator(std::span<const Bit> indicator) {
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < indicator.size(); ++i) {
        if (indicator[i] != 0) members.push_back(i);
    }
    return ObservedSet(indicator.size(), std::move(members));
}

bool ObservedSet::contains(std::size_t index) const noexcept {
    return std::binary_search(members_.begin(), members_.end(), index);
}

BitVector ObservedSet::indicator() const {
    BitVector out(dimension_, 0);
    for (std::size_t i : members_) out[i] = 1;
    return out;
}

std::vector<std::size_t> ObservedSet::complement() const {
    std::vector<std::size_t> out;
    out.reserve(dimension_ - members_.size());
    auto it = members_.begin();
    for (std::size_t i = 0; i < dimension_; ++i) {
        if (it != members_.end() && *it == i) {
            ++it;
        } else {
            out.push_back(i);
        }
    }
    return out;
}

ObservedSet ObservedSet::with(std::size_t index) const {
    if (contains(index)) return *this;
    auto members = members_;
    members.push_back(index);
    return ObservedSet(dimension_, std::move(members));
}

Ordering::Ordering(std::vector<std::size_t> perm) : perm_(std::move(perm)) {
    std::vector<bool> seen(perm_.size(), false);
    for (std::size_t v : perm_) {
        if (v >= perm_.size() || seen[v]) throw InvalidArgument("Ordering: not a permutation");
        seen[v] = true;
    }
}

Ordering Ordering::identity(std::size_t dimension) {
    std::vector<std::size_t> perm(dimension);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    return Ordering(std::move(perm));
}

Ordering Ordering::inverse() const {
    std::vector<std::size_t> inv(perm_.size());
    for (std::size_t i = 0; i < perm_.size(); ++i) inv[perm_[i]] = i;
    return Ordering(std::move(inv));
}

Ordering Ordering::then(const Ordering& next) const {
    if (next.dimension() != dimension()) throw InvalidArgument("Ordering::then: dimension mismatch");
    std::vector<std::size_t> out(perm_.size());
    for (std::size_t i = 0; i < perm_.size(); ++i) out[i] = next.perm_[perm_[i]];
    return Ordering(std::move(out));
}

std::vector<std::size_t> Ordering::missing_in_order(const ObservedSet& obs) const {
    if (obs.dimension() != dimension()) throw InvalidArgument("Ordering::missing_in_order: dimension mismatch");
    std::vector<std::size_t> out;
    out.reserve(dimension() - obs.size());
    for (std::size_t v : perm_) {
        if (!obs.contains(v)) out.push_back(v);
    }
    return out;
}

void QueryDistribution::validate(std::size_t dimension) const {
    if (dimension == 0) throw InvalidArgument("QueryDistribution: dimension must be positive");
    switch (kind) {
        case Kind::FixedSize:
            if (size >= dimension) {
                throw InvalidArgument("QueryDistribution: fixed size " + std::to_string(size) +
                                      " leaves no missing variable for D=" + std::to_string(dimension));
            }
            break;
        case Kind::FixedSet:
            if (observed.dimension() != dimension) throw InvalidArgument("QueryDistribution: fixed set dimension mismatch");
            if (observed.is_full()) throw InvalidArgument("QueryDistribution: fixed set leaves no missing variable");
            break;
        default:
            break;
    }
}

std::string QueryDistribution::to_string() const {
    switch (kind) {
        case Kind::UniformSizeUniformSubset: return "uniform";
        case Kind::UniformSubset: return "uniform-subset";
        case Kind::FixedSize: return "fixed-size:" + std::to_string(size);
        case Kind::FixedSizeHalf: return "fixed-size:half";
        case Kind::PointMassEmpty: return "empty";
        case Kind::FixedSet: {
            std::string out = "fixed-set:";
            for (std::size_t i = 0; i < observed.members().size(); ++i) {
                if (i) out += ',';
                out += std::to_string(observed.members()[i]);
            }
            return out + "/" + std::to_string(observed.dimension());
        }
    }
    return "?";
}

QueryDistribution QueryDistribution::parse(const std::string& text) {
    if (text == "uniform") return uniform();
    if (text == "uniform-subset") return uniform_subset();
    if (text == "empty") return point_mass_empty();
    if (text == "fixed-size:half") return fixed_size_half();
    if (text.rfind("fixed-size:", 0) == 0) return fixed_size(parse_size(text.substr(11), "fixed-size"));
    if (text.rfind("fixed-set:", 0) == 0) {
        // fixed-set:i,j,k/D
        const std::string body = text.substr(10);
        const auto slash = body.find('/');
        if (slash == std::string::npos) throw InvalidArgument("QueryDistribution: fixed-set needs '/D' suffix");
        const std::size_t dim = parse_size(body.substr(slash + 1), "fixed-set dimension");
        std::vector<std::size_t> members;
        std::stringstream ss(body.substr(0, slash));
        std::string item;
        while (std::getline(ss, item, ',')) {
            if (!item.empty()) members.push_back(parse_size(item, "fixed-set index"));
        }
        return fixed_set(ObservedSet(dim, std::move(members)));
    }
    throw InvalidArgument("QueryDistribution: unknown distribution '" + text + "'");
}

ObservedSet sample_query(const QueryDistribution& dist, std::size_t dimension, Rng& rng) {
    dist.validate(dimension);
    using Kind = QueryDistribution::Kind;
    switch (dist.kind) {
        case Kind::UniformSizeUniformSubset: {
            const std::size_t s = uniform_index(rng, dimension);
            return ObservedSet(dimension, random_subset(rng, dimension, s));
        }
        case Kind::UniformSubset: {
            for (;;) {
                std::vector<std::size_t> members;
                for (std::size_t i = 0; i < dimension; ++i) {
                    if (rng() >> 63) members.push_back(i);
                }
                if (members.size() < dimension) return ObservedSet(dimension, std::move(members));
            }
        }
        case Kind::FixedSize:
            return ObservedSet(dimension, random_subset(rng, dimension, dist.size));
        case Kind::FixedSizeHalf:
            return ObservedSet(dimension, random_subset(rng, dimension, dimension / 2));
        case Kind::FixedSet:
            return dist.observed;
        case Kind::PointMassEmpty:
            return ObservedSet(dimension);
    }
    throw InvalidArgument("sample_query: unknown kind");
}

namespace {

// All s-subsets of {0..D-1} in lexicographic order.
void enumerate_subsets(std::size_t dimension, std::size_t s, const std::function<void(std::vector<std::size_t>)>& emit) {
    std::vector<std::size_t> idx(s);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    for (;;) {
        emit(idx);
        std::size_t i = s;
        while (i > 0 && idx[i - 1] == dimension - s + i - 1) --i;
        if (i == 0) return;
        ++idx[i - 1];
        for (std::size_t j = i; j < s; ++j) idx[j] = idx[j - 1] + 1;
    }
}

}  // namespace

std::vector<std::pair<ObservedSet, double>> query_support(const QueryDistribution& dist, std::size_t dimension,
                                                          std::size_t max_support) {
    dist.validate(dimension);
    using Kind = QueryDistribution::Kind;
    std::vector<std::pair<ObservedSet, double>> support;
    auto require = [&](std::uint64_t count) {
        if (count > max_support) {
            throw CapacityError("query_support: support of size " + std::to_string(count) + " exceeds cap " +
                                std::to_string(max_support));
        }
    };
    switch (dist.kind) {
        case Kind::PointMassEmpty:
            support.emplace_back(ObservedSet(dimension), 1.0);
            break;
        case Kind::FixedSet:
            support.emplace_back(dist.observed, 1.0);
            break;
        case Kind::FixedSize:
        case Kind::FixedSizeHalf: {
            const std::size_t s = dist.kind == Kind::FixedSize ? dist.size : dimension / 2;
            const std::uint64_t count = binomial(dimension, s);
            require(count);
            const double p = 1.0 / static_cast<double>(count);
            enumerate_subsets(dimension, s, [&](std::vector<std::size_t> m) { support.emplace_back(ObservedSet(dimension, std::move(m)), p); });
            break;
        }
        case Kind::UniformSizeUniformSubset:
        case Kind::UniformSubset: {
            if (dimension >= 63) require(std::uint64_t{1} << 63);
            require((std::uint64_t{1} << dimension) - 1);
            const double total = static_cast<double>((std::uint64_t{1} << dimension) - 1);
            for (std::size_t s = 0; s < dimension; ++s) {
                const double p = dist.kind == Kind::UniformSubset
                                     ? 1.0 / total
                                     : 1.0 / (static_cast<double>(dimension) * static_cast<double>(binomial(dimension, s)));
                enumerate_subsets(dimension, s, [&](std::vector<std::size_t> m) { support.emplace_back(ObservedSet(dimension, std::move(m)), p); });
            }
            break;
        }
    }
    return support;
}

OrderingSet sample_ordering_set(std::size_t dimension, std::size_t k, std::uint64_t seed) {
    if (dimension == 0) throw InvalidArgument("sample_ordering_set: dimension must be positive");
    if (k == 0) throw InvalidArgument("sample_ordering_set: K must be at least 1");
    if (dimension <= 20 && k > factorial(dimension)) {
        throw InvalidArgument("sample_ordering_set: K=" + std::to_string(k) + " exceeds " + std::to_string(dimension) + "!");
    }
    Rng rng(seed);
    OrderingSet out;
    out.seed = seed;
    std::set<std::vector<std::size_t>> seen;
    while (out.orderings.size() < k) {
        auto perm = random_permutation(rng, dimension);
        if (seen.insert(perm).second) out.orderings.emplace_back(std::move(perm));
    }
    return out;
}

OrderingSet all_orderings(std::size_t dimension) {
    if (dimension == 0 || dimension > 8) throw CapacityError("all_orderings: dimension must be in 1..8");
    std::vector<std::size_t> perm(dimension);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    OrderingSet out;
    do {
        out.orderings.emplace_back(perm);
    } while (std::next_permutation(perm.begin(), perm.end()));
    return out;
}

void save_ordering_set(const OrderingSet& set, const std::filesystem::path& path) {
    std::ostringstream os;
    os << "# orderings k=" << set.k() << " d=" << set.dimension() << " seed=" << set.seed << '\n';
    for (const auto& o : set.orderings) {
        for (std::size_t i = 0; i < o.dimension(); ++i) os << (i ? " " : "") << o[i];
        os << '\n';
    }
    write_file_atomic(path, os.str());
}

OrderingSet load_ordering_set(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw FormatError("cannot open ordering file " + path.string());
    OrderingSet out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.rfind('#', 0) == 0) {
            const auto pos = line.find("seed=");
            if (pos != std::string::npos) out.seed = std::stoull(line.substr(pos + 5));
            continue;
        }
        std::istringstream ls(line);
        std::vector<std::size_t> perm;
        std::string token;
        while (ls >> token) {
            try {
                perm.push_back(parse_size(token, "ordering index"));
            } catch (const InvalidArgument& e) {
                throw ParseError(path.string(), line_no, e.what());
            }
        }
        if (perm.empty()) continue;
        try {
            out.orderings.emplace_back(std::move(perm));
        } catch (const InvalidArgument& e) {
            throw ParseError(path.string(), line_no, e.what());
        }
        if (out.orderings.back().dimension() != out.orderings.front().dimension()) {
            throw ParseError(path.string(), line_no, "ordering length differs from first line");
        }
    }
    if (out.orderings.empty()) throw FormatError("ordering file " + path.string() + " holds no orderings");
    return out;
}

std::uint64_t binomial(std::uint64_t n, std::uint64_t k) {
    if (k > n) return 0;
    k = std::min(k, n - k);
    unsigned __int128 result = 1;
    for (std::uint64_t i = 1; i <= k; ++i) {
        result = result * (n - k + i) / i;
        if (result > std::numeric_limits<std::uint64_t>::max()) {
            throw OverflowError("binomial(" + std::to_string(n) + "," + std::to_string(k) + ") exceeds 64 bits");
        }
    }
    return static_cast<std::uint64_t>(result);
}

std::uint64_t factorial(std::uint64_t n) {
    if (n > 20) throw OverflowError(std::to_string(n) + "! exceeds 64 bits");
    std::uint64_t out = 1;
    for (std::uint64_t i = 2; i <= n; ++i) out *= i;
    return out;
}

std::uint64_t count_conditionals_of_size(std::size_t dimension, std::size_t d) {
    if (d < 1 || d > dimension) {
        throw InvalidArgument("count_conditionals_of_size: d=" + std::to_string(d) + " outside 1.." + std::to_string(dimension));
    }
    const unsigned __int128 total = static_cast<unsigned __int128>(binomial(dimension, d - 1)) * (dimension - d + 1);
    if (total > std::numeric_limits<std::uint64_t>::max()) throw OverflowError("count_conditionals_of_size: overflow");
    return static_cast<std::uint64_t>(total);
}

std::uint64_t count_trained_conditionals_oapp(std::size_t dimension, std::size_t k) {
    if (dimension < 1 || k < 1) throw InvalidArgument("count_trained_conditionals_oapp: D and K must be positive");
    if (dimension >= 64) throw OverflowError("count_trained_conditionals_oapp: 2^D exceeds 64 bits");
    const unsigned __int128 total = static_cast<unsigned __int128>(k) * ((std::uint64_t{1} << dimension) - 1);
    if (total > std::numeric_limits<std::uint64_t>::max()) throw OverflowError("count_trained_conditionals_oapp: overflow");
    return static_cast<std::uint64_t>(total);
}

std::map<std::size_t, std::size_t> audit_conditional_usage(std::span<const TrainingEvent> events, std::size_t dimension) {
    std::map<std::size_t, std::size_t> histogram;
    for (const auto& e : events) {
        if (e.mask.dimension() != dimension) throw InvalidArgument("audit_conditional_usage: event dimension mismatch");
        ++histogram[e.conditional_size()];
    }
    return histogram;
}

}  // namespace oanade
