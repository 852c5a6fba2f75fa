# ##### BEGIN GPL LICENSE BLOCK #####
#
# Copyright (C) 2026  The mmpr developers
#
# This program is free software: you can redistribute it and/or modify
# it under the terms of the GNU General Public License as published by
# the Free Software Foundation, either version 3 of the License, or
# (at your option) any later version.
#
# This program is distributed in the hope that it will be useful,
# but WITHOUT ANY WARRANTY; without even the implied warranty of
# MERCHANTABILITY or FITNESS FOR A PARTICULAR PURPOSE.  See the
# GNU General Public License for more details.

# You should have received a copy of the GNU General Public License
# along with this program.  If not, see <http://www.gnu.org/licenses/>.
#
# ##### END GPL LICENSE BLOCK #####
"""
The command factory which allows creating instances of commands from their sub-command name
"""
from __future__ import annotations

from typing import Type, cast

from .commands import (
    Command,
    FitCommand,
    InclusionStudyCommand,
    MetricsCommand,
    PathCommand,
    PenaltySurfaceCommand,
    SimulateCommand,
)
from .constants import CommandIdentifier
from .errors import InvalidConfigError


class CommandFactory:
    """
    A factory to select the command implementing a sub-command of the command line.
    """

    def __init__(self) -> None:
        self.__available_commands: dict[CommandIdentifier, Type[Command]] = {}

    def register(self, command: Type[Command]) -> None:
        """
        Register a command with the factory. Should only be called in this file.

        Parameters
        ----------
        command: Type[Command]
            A command class to be registered with the factory.
        """
        self.__available_commands[cast(CommandIdentifier, command.command_identifier())] = command

    @property
    def identifiers(self) -> tuple[CommandIdentifier, ...]:
        """The registered sub-commands"""
        return tuple(self.__available_commands)

    def get(self, identifier: CommandIdentifier | str) -> Command:
        """
        Look up the command for a sub-command name.

        Parameters
        ----------
        identifier: CommandIdentifier or str
            The sub-command

        Returns
        -------
        Command
            A new instance of the command

        Raises
        ----------
        InvalidConfigError
            If no command is registered under that name.
        """
        try:
            return self.__available_commands[CommandIdentifier(identifier)]()
        except (KeyError, ValueError):
            raise InvalidConfigError(f"No command available for '{identifier}'") from None


# Register all available commands here to make them available automatically to the command line
command_factory = CommandFactory()
command_factory.register(FitCommand)
command_factory.register(PathCommand)
command_factory.register(SimulateCommand)
command_factory.register(InclusionStudyCommand)
command_factory.register(MetricsCommand)
command_factory.register(PenaltySurfaceCommand)
