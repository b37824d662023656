#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace flexplan {

inline constexpr double kSlotWidthHz = 12.5e9;
inline constexpr int kDefaultSlotCount = 400;
// Lower edge of slot 0. Any fixed anchor works; this one puts the 400-slot
// grid at 191.325..196.325 THz.
inline constexpr double kGridAnchorHz = 191.325e12;

enum class Modulation { QPSK, QAM16, QAM32, QAM64 };

int bits_per_symbol(Modulation m);
const char* modulation_name(Modulation m);
Modulation modulation_from_name(const std::string& name);

// One carrier: transceiver settings plus its position on the grid.
struct ChannelConfig {
    double center_frequency_hz = 0.0;
    double symbol_rate_gbd = 0.0;
    Modulation modulation = Modulation::QPSK;
    int data_rate_gbps = 0;
    double launch_power_dbm = 0.0;

    double bandwidth_hz() const { return symbol_rate_gbd * 1e9; }
    double launch_power_w() const;
    double lower_edge_hz() const { return center_frequency_hz - bandwidth_hz() / 2.0; }
    double upper_edge_hz() const { return center_frequency_hz + bandwidth_hz() / 2.0; }
};

struct SlotRange {
    int start = 0;
    int count = 0;
    int end() const { return start + count; }  // exclusive
};

// Number of 12.5 GHz slots needed for a carrier of symbol rate `b_gbd`
// plus a guard band.
int slots_needed(double b_gbd, double guard_ghz);

// Center frequency of a slot range (channels sit in the middle of their
// allocated slots).
double slot_range_center_hz(const SlotRange& range);

// Occupancy of one link's flexible grid. Slots hold the id of the lightpath
// occupying them, -1 when free. A lightpath's slots are contiguous and a
// placement claims one contiguous run.
class FlexGrid {
public:
    explicit FlexGrid(int n_slots = kDefaultSlotCount);

    int n_slots() const { return static_cast<int>(slots_.size()); }
    int occupied_count() const { return occupied_; }
    bool is_free(int slot) const { return slots_[static_cast<std::size_t>(slot)] < 0; }
    std::int64_t owner(int slot) const { return slots_[static_cast<std::size_t>(slot)]; }

    // Lowest-index contiguous free run of length n, if any. Does not mutate.
    std::optional<SlotRange> first_fit(int n) const;

    void place(std::int64_t lightpath_id, const SlotRange& range);
    void remove(std::int64_t lightpath_id);

    std::optional<SlotRange> range_of(std::int64_t lightpath_id) const;
    std::vector<bool> free_mask() const;
    const std::vector<std::int64_t>& raw() const { return slots_; }

private:
    std::vector<std::int64_t> slots_;
    int occupied_ = 0;
};

// Lowest-index contiguous free run of length n given a combined free mask
// (used for multi-link spectrum continuity).
std::optional<SlotRange> first_fit_in_mask(const std::vector<bool>& free, int n);

// Indices of all channels other than `cut_index`, sorted by |Δf| to the CUT
// center ascending, ties lower-frequency-first, truncated to `max_neighbors`.
std::vector<int> neighbors_by_distance(const std::vector<ChannelConfig>& spectrum, int cut_index,
                                       int max_neighbors = 10);

}  // namespace flexplan
