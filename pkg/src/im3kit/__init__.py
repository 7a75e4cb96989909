"""Third-order intermodulation ACI power for N carriers through a cubic device."""
from .channel_plan import (Channel, ChannelPlan, IncommensuratePlanError, NonlinearityModel,
                           PlanError, build_uniform_plan, equal_plan, gridify, load_plan,
                           total_power)
from .closed_form import (CountPair, equal_power_aci, l_d, l_t, l_t_bruteforce, max_normalized,
                          normalized_profile, ratio_max_min)
from .im3_engine import (AciProfile, IM3Product, ProductClass, aci_power, aci_power_coherent,
                         aci_profile, enumerate_products, signal_term_amplitude)
from .kernels import BACKEND

__version__ = "0.1.0"
