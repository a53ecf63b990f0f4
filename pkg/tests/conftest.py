from __future__ import annotations

import random

import pytest

from groundbox.codec import CodecProfile
from groundbox.convgen import TemplateBank
from groundbox.geometry import virtual_intrinsics


@pytest.fixture(scope="session")
def vcam():
    return virtual_intrinsics()


@pytest.fixture(scope="session")
def pretrain_profile():
    return CodecProfile.pretrain()


@pytest.fixture(scope="session")
def finetune_profile():
    return CodecProfile.finetune()


@pytest.fixture(scope="session")
def bank():
    return TemplateBank.load()


@pytest.fixture
def rng():
    return random.Random(20240612)
