#pragma once

#include <Eigen/Core>

#include "hetsim/errors.hpp"

namespace hetsim {

// Observation window of N recording slots ending just before decision time t,
// decision window of M slots starting at t*M. Slots are 0-based.
struct WindowSpec {
    int n_obs = 6;
    int m_decision = 6;

    void validate() const {
        if (n_obs < 1 || m_decision < 1) throw InputError("window sizes must be >= 1");
    }

    Eigen::Index obs_start(Eigen::Index t) const { return t * m_decision - n_obs; }
    Eigen::Index decision_start(Eigen::Index t) const { return t * m_decision; }

    // Smallest t whose observation window fits in the series.
    Eigen::Index first_t() const {
        return (n_obs + m_decision - 1) / m_decision;
    }
    // Largest t whose decision window fits in a series of n_slots.
    Eigen::Index last_t(Eigen::Index n_slots) const {
        return n_slots / m_decision - 1;
    }
};

}  // namespace hetsim
