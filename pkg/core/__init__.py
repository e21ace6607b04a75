import core.storage
from core.functions import *
import core.errors
import core.rng

# engine, bottom-up
import core.qstate
import core.circuit
import core.chaos
import core.noisemod
import core.forward
import core.metrics
import core.denoiser
import core.optim
import core.train
import core.qae
import core.data

import core.module
import core.commands
import core.config
import core.channel
import core.manager
