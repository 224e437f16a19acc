"""Linear-optical witnesses of genuine multipartite entanglement for single-photon W states."""

###################################################################################
# Apache Software License 2.0
#
# Copyright (c) 2024, wwitness developers
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
# http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
###################################################################################

__author__ = """wwitness developers"""
__email__ = "wwitness-dev@users.noreply.github.com"
__version__ = "0.1.0"

from . import experiment, fock, optics, witness
from ._config import OPTIONS, set_options
from .experiment import DetectorModel, ExperimentReport, SourceModel
from .fock import FockSpace, FockState, MixedState
from .optics import Network, WStateSpec
from .witness import BasicWitness, ModifiedWitness
