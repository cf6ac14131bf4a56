"""
Test configuration and fixtures for the IVWSN simulator.
"""

import textwrap
from pathlib import Path

import pytest

from ivwsn.link.controller import LinkLayer
from ivwsn.link.device import Device
from ivwsn.phy.ber import FixedBer
from ivwsn.phy.channel import ChannelModel, RadioLink
from ivwsn.sim.engine import Simulator
from ivwsn.sim.rng import RngStreams


@pytest.fixture(scope="session")
def project_root():
    """Get the project root directory."""
    return Path(__file__).parent.parent


@pytest.fixture
def radio():
    """
    Factory for a master/slave pair over one link.

    Returns (link_layer, channel_model); extra keyword arguments go to
    ChannelModel. The default PHY is lossless.
    """

    def build(seed=1, path_loss_db=40.0, slaves=("s1",), **channel_kwargs):
        channel_kwargs.setdefault("ber_curve", FixedBer(0.0))
        streams = RngStreams(seed)
        model = ChannelModel(streams, **channel_kwargs)
        for slave in slaves:
            model.add_link(RadioLink("m", slave, path_loss_db))
        link_layer = LinkLayer(Simulator(), model, streams)
        link_layer.add_device(Device.with_roles("m", ["central"]))
        for slave in slaves:
            link_layer.add_device(Device.with_roles(slave, ["peripheral"]))
        return link_layer, model

    return build


@pytest.fixture
def write_scenario(tmp_path):
    """Write dedented YAML text to a scenario file and return its path."""

    def write(text, name="scenario.yaml"):
        path = tmp_path / name
        path.write_text(textwrap.dedent(text).lstrip(), encoding="utf-8")
        return path

    return write
