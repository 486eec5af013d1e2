#pragma once

#include <iosfwd>
#include <map>
#include <string>
#include <tuple>
#include <vector>

#include "mddthz/association.hpp"
#include "mddthz/channel.hpp"
#include "mddthz/precoding.hpp"

namespace mddthz {

/// A link rate that may be unbounded: a wired hop, or a hop that does not
/// exist (single-AP cluster). Unbounded values never enter arithmetic.
class LinkRate {
public:
    enum class Kind { wireless, wired, absent };

    LinkRate() = default;
    static LinkRate finite(double bps) { return LinkRate(Kind::wireless, bps); }
    static LinkRate wired() { return LinkRate(Kind::wired, 0.0); }
    static LinkRate absent() { return LinkRate(Kind::absent, 0.0); }

    Kind kind() const { return kind_; }
    bool unbounded() const { return kind_ != Kind::wireless; }
    double value() const;  // throws on unbounded rates
    std::string kind_name() const;

    friend bool operator==(const LinkRate& a, const LinkRate& b) {
        return a.kind_ == b.kind_ && (a.unbounded() || a.value_ == b.value_);
    }

private:
    LinkRate(Kind k, double v) : kind_(k), value_(v) {}
    Kind kind_ = Kind::wireless;
    double value_ = 0.0;
};

/// Minimum that treats unbounded rates as +infinity. Wired wins over absent
/// when both operands are unbounded.
LinkRate min_rate(const LinkRate& a, const LinkRate& b);

using Key3 = std::tuple<int, int, int>;
using Key4 = std::tuple<int, int, int, int>;

struct PowerAllocation {
    std::map<Key3, double> cc_power;  // (l, u, m)
    std::map<Key4, double> ca_power;  // (l, q, u, m)
    std::map<Key3, double> ad_power;  // (l, node, u)
    std::map<Key3, int> cc_gamma;     // (l, u, m)
    std::map<Key4, int> ca_gamma;     // (l, q, u, m)
};

struct CcRates {
    std::map<std::pair<int, int>, double> per_pair;  // (l, u)
    std::vector<LinkRate> per_device;
};

struct CaRates {
    std::map<Key3, double> per_link;  // (l, q, u)
    std::vector<LinkRate> per_device;
};

/// CPU-to-CAP rates. `clusters` lists the clusters whose CAPs are fed.
/// si_variance is added only at CAPs that relay to at least one AP.
CcRates rate_cc(const ChannelSet& ch, const ClusterAssignment& a, const std::vector<int>& clusters,
                const std::vector<int>& m_cc, const PrecoderSet& f, const PowerAllocation& alloc, double noise,
                double si_variance, double subcarrier_bw);

/// CAP-to-AP rates with intra- and inter-cluster interference.
CaRates rate_ca(const ChannelSet& ch, const ClusterAssignment& a, const std::vector<int>& clusters,
                const std::vector<int>& m_ca, const PrecoderSet& w, const PowerAllocation& alloc, double noise,
                double subcarrier_bw);

/// Access SINR per device.
std::vector<double> sinr_ad(const ChannelSet& ch, const ClusterAssignment& a, const AccessPrecoders& v,
                            const PowerAllocation& alloc, double noise);

std::vector<double> rate_ad(const ChannelSet& ch, const ClusterAssignment& a, const AccessPrecoders& v,
                            const PowerAllocation& alloc, double noise, double bandwidth);

/// Fraction of each link's raw rate that reaches the device under a frame.
struct FrameInfo {
    std::string kind = "mdd";
    double tau_cc = 1.0 / 3.0;
    double tau_ca = 1.0 / 3.0;
    double tau_ad = 1.0 / 3.0;
    double tau_gp = 0.0;
    double scale_cc = 1.0;
    double scale_ca = 1.0;
    double scale_ad = 1.0;
};

struct RateReport {
    std::string scheme;
    int n_clusters = 0;
    int m_cc_size = 0;
    int m_ca_size = 0;
    std::vector<LinkRate> c_cc;
    std::vector<LinkRate> c_ca;
    std::vector<LinkRate> c_ad;
    std::vector<double> c_end;
    double objective = 0.0;  // minimum over devices
    FrameInfo frame;
    std::map<std::pair<int, int>, double> cc_pairs;
    std::map<Key3, double> ca_links;
    bool flagged = false;
    std::string note;
};

/// Fills c_end and objective from the three link rates and the frame scaling.
void end_to_end(RateReport& r);

/// Budget and exclusivity violations beyond `tol` (relative for budgets).
std::vector<std::string> check_allocation(const PowerAllocation& alloc, const ClusterAssignment& a,
                                          const AccessPrecoders* v, double p_cpu, double p_ap, double tol);

void write_rate_csv_header(std::ostream& os);
void write_rate_csv(std::ostream& os, int trial, const RateReport& r, std::uint64_t channel_hash);

}  // namespace mddthz
