// Copyright 2026 The spinlock Authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at

//     http://www.apache.org/licenses/LICENSE-2.0

// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include "spinlock/noise.hpp"

#include <Eigen/Core>

#include <complex>
#include <cstdint>
#include <filesystem>
#include <string>
#include <span>
#include <vector>

namespace spinlock {

/// Reference frame of a Bloch record.
/// Noise: the locking frame in which the drive is removed (phi enters as a field
/// rotating at Omega about x). Drive: the frame of the resonant drive, where the
/// locking drive itself rotates the state about x at Omega. <sx> agrees in both.
enum class Frame { Noise, Drive };

/// Pure qubit state in the basis (|1>, |2>) with sigma_z |1> = |1>.
using Spinor = Eigen::Vector2cd;

Spinor plus_x_state();
/// Spinor with the given Bloch vector (normalised).
Spinor spinor_from_bloch(double x, double y, double z);

struct BlochVector {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;

    double norm() const;
};

BlochVector bloch_of(const Spinor& psi);

struct BlochRecord {
    std::vector<double> times;
    std::vector<double> sx, sy, sz;
    std::vector<double> se_sx, se_sy, se_sz;  ///< standard errors; zero for single trajectories
    Frame frame = Frame::Noise;
    std::size_t trajectories = 1;
    /// Trajectories whose |phi| exceeded the small-phase threshold (0.3 rad) at some step.
    std::size_t strong_phase_trajectories = 0;

    std::size_t size() const noexcept { return times.size(); }
};

/// CSV with columns t_s,sx,sy,sz,se_sx,se_sy,se_sz.
std::string bloch_csv(const BlochRecord& record);
void write_bloch_csv(const std::filesystem::path& path, const BlochRecord& record);

/// Row-major vectorised density matrix (rho11, rho12, rho21, rho22).
struct VectorizedDensity {
    Eigen::Vector4cd rho = Eigen::Vector4cd::Zero();

    static VectorizedDensity from_spinor(const Spinor& psi);
    static VectorizedDensity from_bloch(double x, double y, double z);
    BlochVector bloch() const;
    /// Trace one, Hermitian, populations in [0, 1] within `tol`.
    bool is_physical(double tol = 1e-12) const;
};

struct DriveConfig {
    double rabi = 0.0;                 ///< Omega, rad/s
    Spinor initial = plus_x_state();
    double dt = 0.0;                   ///< propagation step, s
    Frame frame = Frame::Noise;        ///< frame of the returned record

    /// Step min(0.01/Omega, noise_dt).
    static DriveConfig with_default_step(double rabi, double noise_dt = 0.0);
    /// Throws InputError unless Omega > 0, dt > 0 and dt Omega < 0.1.
    void validate() const;
};

/// Coefficients of sigma_y and sigma_z in H(t)/hbar of the noise-frame Hamiltonian.
struct NoiseFrameField {
    double h_y = 0.0;
    double h_z = 0.0;
};

NoiseFrameField noise_frame_hamiltonian(double rabi, double phi, double t);

/// Phase seen by the qubit: optional sampled noise (zero-order hold) plus coherent tones.
struct PhaseSignal {
    const NoiseTrajectory* noise = nullptr;
    ModulationSpec modulation;
};

/// Largest |phi| for which the small-phase noise-frame model is considered reliable.
inline constexpr double kStrongPhaseThreshold = 0.3;

/// Unitary propagation of a pure state under the noise-frame Hamiltonian with phi held
/// constant over each step (exact per-step solution). Records at every time in `t_grid`
/// (non-decreasing, >= 0; need not be multiples of dt).
BlochRecord propagate_trajectory(const DriveConfig& drive, const PhaseSignal& signal, std::span<const double> t_grid);

/// Mean and standard error over `n_traj` trajectories with noise drawn from `model`
/// (sampled at drive.dt) plus the coherent tones in `modulation`. Trajectory i uses
/// derive_seed(master_seed, i); the result does not depend on `threads`.
BlochRecord ensemble_average(const DriveConfig& drive, const PsdModel& model, const ModulationSpec& modulation,
                             std::size_t n_traj, std::uint64_t master_seed, std::span<const double> t_grid,
                             unsigned threads = 1);

/// Liouville superoperator (1/i)(H x 1 - 1 x H^T) of the noise-frame Hamiltonian
/// acting on the row-major vectorised density matrix.
Eigen::Matrix4cd liouville_superoperator(double rabi, double phi, double t);

struct CumulantOptions {
    double relative_tolerance = 1e-9;
};

struct CumulantResult {
    Eigen::Matrix4cd exponent;  ///< int_0^t dt1 int_0^t1 dt2 <L(t1) L(t2)>
    double error_estimate = 0.0;
    double max_imaginary = 0.0; ///< largest |Im| entry of the exponent (bounded, O(S/Omega))
    double tail_fraction = 0.0; ///< share of the result from the analytic high-frequency tail
};

/// Second-order cumulant of the noise-frame Liouvillian for Gaussian phase noise with
/// PSD `model`, evaluated through the Wiener-Khinchin kernel: time integrals in closed
/// form, frequency integral by adaptive Gauss-Kronrod quadrature.
/// Throws NumericalError when the frequency integral diverges or fails to converge.
CumulantResult second_cumulant_integral(double rabi, const PsdModel& model, double t, CumulantOptions options = {});

/// Matrix M of the long-time decay operator Phi(t) = exp(-chi2(t) M).
Eigen::Matrix4d decay_exponent_matrix();

struct DecayOperator {
    Eigen::Matrix4d phi;
    double chi2 = 0.0;  ///< (Omega^2/4) S(Omega) t/2
};

/// Closed-form long-time decay operator for S(Omega) = `psd_at_rabi`.
DecayOperator analytic_decay_operator(double rabi, double psd_at_rabi, double t);

/// Resonant coherent modulation beta cos(Omega t + delta), rotating-wave closed form,
/// reported in the drive frame.
BlochRecord coherent_evolution(double rabi, double beta, double delta, std::span<const double> t_grid);

/// cos(beta Omega t / 2) exp(-Omega^2 S t / 2).
double combined_sigma_x(double rabi, double beta, double psd_at_rabi, double t);

} // namespace spinlock
