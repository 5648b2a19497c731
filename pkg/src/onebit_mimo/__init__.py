"""One-bit oversampled massive MIMO channel estimation, Bayesian CRBs and
Monte Carlo sweeps."""
from .bounds import Bim, CrbReport, bim_data_lower_oversampled, bim_data_m1, bim_prior, crb_from_bim
from .channel import ChannelPrior, receive_correlation, sample_channel
from .config import SystemConfig, load_config
from .detection import DetectionConfig, SlidingWindowDetector, ser
from .estimation import LraLmmse, UnquantizedLmmse, lmmse_unquantized, lra_lmmse_estimate, normalized_mse
from .harness import CurveRecord, run_crb_sweep, run_mse_sweep, run_ser_sweep
from .quantization import arcsin_covariance, bussgang_operator, pilot_covariance, quantize_1bit
from .signal import PulseBank, build_g_matrix, build_upsampler, build_z_matrix, rrc_taps
from .system import PilotModel, build_phi, make_pilots, snr_to_noise_var

__version__ = "0.1.0"
