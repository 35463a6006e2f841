#pragma once

#include <stdexcept>
#include <string>

namespace nrv2x {

enum class CyclicPrefix { Normal, Extended };

/// Scalable OFDM numerology for the sidelink: SCS = 2^mu * 15 kHz,
/// 2^mu slots per 1 ms subframe, extended CP only with 60 kHz.
struct Numerology {
    int mu = 0;
    CyclicPrefix cp = CyclicPrefix::Normal;

    int scs_khz() const { return 15 << mu; }
    int slots_per_subframe() const { return 1 << mu; }
    double slot_duration_ms() const { return 1.0 / (1 << mu); }
    int symbols_per_slot() const { return cp == CyclicPrefix::Normal ? 14 : 12; }
    int slots_per_second() const { return 1000 * (1 << mu); }

    /// Slots spanned by a millisecond count (exact for integer ms).
    std::int64_t ms_to_slots(std::int64_t ms) const { return ms * (1 << mu); }
};

/// Validates (mu, cp, carrier) against the supported numerology set:
/// mu in [0,3]; extended CP only with mu=2; mu 0/1 are FR1-only,
/// mu=2 FR1 or FR2, mu=3 FR2-only. FR1 = 0.41-7.125 GHz, FR2 = 24.25-52.6 GHz.
inline Numerology make_numerology(int mu, CyclicPrefix cp, double carrier_ghz) {
    if (mu < 0 || mu > 3)
        throw std::invalid_argument("numerology.mu: allowed {0,1,2,3}, given " + std::to_string(mu));
    if (cp == CyclicPrefix::Extended && mu != 2)
        throw std::invalid_argument("numerology.cp: extended CP allowed only with mu=2");
    const bool fr1 = carrier_ghz >= 0.41 && carrier_ghz <= 7.125;
    const bool fr2 = carrier_ghz >= 24.25 && carrier_ghz <= 52.6;
    if (!fr1 && !fr2)
        throw std::invalid_argument("carrier_ghz: outside FR1 [0.41,7.125] and FR2 [24.25,52.6], given " +
                                    std::to_string(carrier_ghz));
    if ((mu == 0 || mu == 1) && !fr1)
        throw std::invalid_argument("numerology.mu: mu=" + std::to_string(mu) + " supported only in FR1");
    if (mu == 3 && !fr2)
        throw std::invalid_argument("numerology.mu: mu=3 supported only in FR2 (carrier above 24.25 GHz)");
    return Numerology{mu, cp};
}

/// Slots a UE needs to identify and select resources (selection-window lower
/// bound T1's cap), per SCS: 3/5/9/17 slots for mu=0..3.
inline int t_proc1_slots(int mu) {
    static constexpr int table[4] = {3, 5, 9, 17};
    return table[mu];
}

/// Slots to complete the sensing procedure: 1/1/2/4 for mu=0..3.
inline int t_proc0_slots(int mu) {
    static constexpr int table[4] = {1, 1, 2, 4};
    return table[mu];
}

}  // namespace nrv2x
