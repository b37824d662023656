#include "flexplan/grid.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace flexplan {

int bits_per_symbol(Modulation m) {
    switch (m) {
        case Modulation::QPSK: return 2;
        case Modulation::QAM16: return 4;
        case Modulation::QAM32: return 5;
        case Modulation::QAM64: return 6;
    }
    throw std::logic_error("unknown modulation");
}

const char* modulation_name(Modulation m) {
    switch (m) {
        case Modulation::QPSK: return "QPSK";
        case Modulation::QAM16: return "16QAM";
        case Modulation::QAM32: return "32QAM";
        case Modulation::QAM64: return "64QAM";
    }
    throw std::logic_error("unknown modulation");
}

Modulation modulation_from_name(const std::string& name) {
    if (name == "QPSK") return Modulation::QPSK;
    if (name == "16QAM") return Modulation::QAM16;
    if (name == "32QAM") return Modulation::QAM32;
    if (name == "64QAM") return Modulation::QAM64;
    throw std::runtime_error("unknown modulation: " + name);
}

double ChannelConfig::launch_power_w() const {
    return std::pow(10.0, (launch_power_dbm - 30.0) / 10.0);
}

int slots_needed(double b_gbd, double guard_ghz) {
    if (b_gbd <= 0.0) throw std::invalid_argument("slots_needed: symbol rate must be positive");
    if (guard_ghz < 0.0) throw std::invalid_argument("slots_needed: guard band must be nonnegative");
    return static_cast<int>(std::ceil((b_gbd + guard_ghz) / 12.5 - 1e-9));
}

double slot_range_center_hz(const SlotRange& range) {
    return kGridAnchorHz + (static_cast<double>(range.start) + range.count / 2.0) * kSlotWidthHz;
}

FlexGrid::FlexGrid(int n_slots) : slots_(static_cast<std::size_t>(n_slots), -1) {
    if (n_slots <= 0) throw std::invalid_argument("FlexGrid: slot count must be positive");
}

std::optional<SlotRange> FlexGrid::first_fit(int n) const {
    if (n < 1) throw std::invalid_argument("first_fit: need at least one slot");
    int run = 0;
    for (int i = 0; i < n_slots(); ++i) {
        run = is_free(i) ? run + 1 : 0;
        if (run == n) return SlotRange{i - n + 1, n};
    }
    return std::nullopt;
}

std::optional<SlotRange> first_fit_in_mask(const std::vector<bool>& free, int n) {
    if (n < 1) throw std::invalid_argument("first_fit_in_mask: need at least one slot");
    int run = 0;
    for (int i = 0; i < static_cast<int>(free.size()); ++i) {
        run = free[static_cast<std::size_t>(i)] ? run + 1 : 0;
        if (run == n) return SlotRange{i - n + 1, n};
    }
    return std::nullopt;
}

void FlexGrid::place(std::int64_t lightpath_id, const SlotRange& range) {
    if (lightpath_id < 0) throw std::invalid_argument("place: lightpath id must be nonnegative");
    if (range.start < 0 || range.count < 1 || range.end() > n_slots())
        throw std::invalid_argument("place: slot range out of bounds");
    for (int i = range.start; i < range.end(); ++i)
        if (!is_free(i)) throw std::runtime_error("place: slot " + std::to_string(i) + " already occupied");
    if (range_of(lightpath_id)) throw std::runtime_error("place: lightpath already on this grid");
    for (int i = range.start; i < range.end(); ++i) slots_[static_cast<std::size_t>(i)] = lightpath_id;
    occupied_ += range.count;
}

void FlexGrid::remove(std::int64_t lightpath_id) {
    int freed = 0;
    for (auto& s : slots_) {
        if (s == lightpath_id) {
            s = -1;
            ++freed;
        }
    }
    if (freed == 0) throw std::runtime_error("remove: lightpath not on this grid");
    occupied_ -= freed;
}

std::optional<SlotRange> FlexGrid::range_of(std::int64_t lightpath_id) const {
    int start = -1;
    int count = 0;
    for (int i = 0; i < n_slots(); ++i) {
        if (slots_[static_cast<std::size_t>(i)] == lightpath_id) {
            if (start < 0) start = i;
            ++count;
        }
    }
    if (start < 0) return std::nullopt;
    return SlotRange{start, count};
}

std::vector<bool> FlexGrid::free_mask() const {
    std::vector<bool> mask(slots_.size());
    for (std::size_t i = 0; i < slots_.size(); ++i) mask[i] = slots_[i] < 0;
    return mask;
}

std::vector<int> neighbors_by_distance(const std::vector<ChannelConfig>& spectrum, int cut_index,
                                       int max_neighbors) {
    if (cut_index < 0 || cut_index >= static_cast<int>(spectrum.size()))
        throw std::invalid_argument("neighbors_by_distance: cut index out of range");
    const double f_cut = spectrum[static_cast<std::size_t>(cut_index)].center_frequency_hz;
    std::vector<int> order;
    order.reserve(spectrum.size());
    for (int i = 0; i < static_cast<int>(spectrum.size()); ++i)
        if (i != cut_index) order.push_back(i);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        double fa = spectrum[static_cast<std::size_t>(a)].center_frequency_hz;
        double fb = spectrum[static_cast<std::size_t>(b)].center_frequency_hz;
        double da = std::abs(fa - f_cut);
        double db = std::abs(fb - f_cut);
        if (da != db) return da < db;
        return fa < fb;  // tie: lower frequency first
    });
    if (static_cast<int>(order.size()) > max_neighbors) order.resize(static_cast<std::size_t>(max_neighbors));
    return order;
}

}  // namespace flexplan
