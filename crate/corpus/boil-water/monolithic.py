# Boil a pot of water on the stove.
# Monolithic rendering: every class, action and rule written out by hand in a
# single file, with no shared engine layer. Kept as a size reference for the
# DSL version in game.wg.

import random


class GameObject:
    def __init__(self, name):
        self.name = name
        self.parent = None
        self.contains = []
        self.properties = {
            "isContainer": False,
            "isMoveable": True,
            "isOpenable": False,
            "isOpen": False,
            "isActivatable": False,
            "isOn": False,
        }

    def add_object(self, obj):
        if obj.parent is not None:
            obj.parent.remove_object(obj)
        obj.parent = self
        self.contains.append(obj)

    def remove_object(self, obj):
        if obj in self.contains:
            self.contains.remove(obj)
        obj.parent = None

    def get_all_contained(self):
        out = []
        for obj in self.contains:
            out.append(obj)
            out.extend(obj.get_all_contained())
        return out

    def display_name(self):
        return self.name

    def tick(self):
        pass

    def describe(self):
        return "a " + self.display_name()


class Container(GameObject):
    def __init__(self, name):
        super().__init__(name)
        self.properties["isContainer"] = True
        self.properties["isOpen"] = True

    def is_closed(self):
        return self.properties["isOpenable"] and not self.properties["isOpen"]

    def open(self):
        if not self.properties["isOpenable"]:
            return "The " + self.name + " cannot be opened."
        if self.properties["isOpen"]:
            return "The " + self.name + " is already open."
        self.properties["isOpen"] = True
        return "The " + self.name + " is now open."

    def close(self):
        if not self.properties["isOpenable"]:
            return "The " + self.name + " cannot be closed."
        if not self.properties["isOpen"]:
            return "The " + self.name + " is already closed."
        self.properties["isOpen"] = False
        return "The " + self.name + " is now closed."

    def describe(self):
        quals = []
        if self.properties["isOpenable"]:
            quals.append("closed" if self.is_closed() else "open")
        if not self.is_closed() and self.contains:
            inner = [obj.describe() for obj in self.contains]
            quals.append("containing " + join_phrase(inner))
        text = "a " + self.display_name()
        if quals:
            text += " (" + ", ".join(quals) + ")"
        return text


class Device(GameObject):
    def __init__(self, name):
        super().__init__(name)
        self.properties["isActivatable"] = True
        self.properties["isMoveable"] = False

    def turn_on(self):
        if self.properties["isOn"]:
            return "The " + self.name + " is already on."
        self.properties["isOn"] = True
        return "The " + self.name + " is now on."

    def turn_off(self):
        if not self.properties["isOn"]:
            return "The " + self.name + " is already off."
        self.properties["isOn"] = False
        return "The " + self.name + " is now off."


class Substance(GameObject):
    def __init__(self, name, solid, liquid, gas, melting, boiling, temperature):
        super().__init__(name)
        self.properties["isMoveable"] = False
        self.properties["solidName"] = solid
        self.properties["liquidName"] = liquid
        self.properties["gasName"] = gas
        self.properties["meltingPoint"] = melting
        self.properties["boilingPoint"] = boiling
        self.properties["temperature"] = temperature

    def state(self):
        t = self.properties["temperature"]
        if t < self.properties["meltingPoint"]:
            return "solid"
        if t < self.properties["boilingPoint"]:
            return "liquid"
        return "gas"

    def display_name(self):
        return self.properties[self.state() + "Name"]

    def describe(self):
        return "some " + self.display_name()


class Pot(Container):
    def __init__(self):
        super().__init__("pot")


class Stove(Container):
    def __init__(self):
        super().__init__("stove")
        self.properties["isActivatable"] = True
        self.properties["isMoveable"] = False

    def turn_on(self):
        return Device.turn_on(self)

    def turn_off(self):
        return Device.turn_off(self)

    def tick(self):
        if not self.properties["isOn"]:
            return
        for obj in self.get_all_contained():
            if isinstance(obj, Water) and obj.properties["temperature"] < 100:
                obj.properties["temperature"] += 25

    def describe(self):
        state = "on" if self.properties["isOn"] else "off"
        text = "a stove (" + state
        if self.contains:
            text += ", containing " + join_phrase([o.describe() for o in self.contains])
        return text + ")"


class Cupboard(Container):
    def __init__(self):
        super().__init__("cupboard")
        self.properties["isOpenable"] = True
        self.properties["isOpen"] = False
        self.properties["isMoveable"] = False


class Water(Substance):
    def __init__(self):
        super().__init__("water", "ice", "water", "steam", 0.0, 100.0, 0.0)


class Fork(GameObject):
    def __init__(self):
        super().__init__("fork")


class Agent(Container):
    def __init__(self):
        super().__init__("agent")
        self.properties["isMoveable"] = False


class World(Container):
    def __init__(self, name):
        super().__init__(name)
        self.properties["isMoveable"] = False


def join_phrase(items):
    if not items:
        return ""
    if len(items) == 1:
        return items[0]
    return ", ".join(items[:-1]) + " and " + items[-1]


class BoilWaterGame:
    def __init__(self, random_seed=0):
        self.random = random.Random(random_seed)
        self.root = self.initialize_world()
        self.score = 0
        self.num_steps = 0
        self.game_over = False
        self.game_won = False
        self.possible_actions = {}
        self.generate_possible_actions()

    def initialize_world(self):
        world = World("kitchen")
        self.agent = Agent()
        world.add_object(self.agent)
        self.stove = Stove()
        world.add_object(self.stove)
        cupboard = Cupboard()
        world.add_object(cupboard)
        pot = Pot()
        cupboard.add_object(pot)
        self.water = Water()
        pot.add_object(self.water)
        world.add_object(Fork())
        return world

    def get_task_description(self):
        return "Your task is to boil water."

    def visible_objects(self):
        out = []
        queue = list(self.root.contains)
        while queue:
            obj = queue.pop(0)
            if obj is self.agent:
                queue.extend(obj.contains)
                continue
            out.append(obj)
            if isinstance(obj, Container) and not obj.is_closed():
                queue.extend(obj.contains)
        return out

    def add_action(self, text, args):
        if text not in self.possible_actions:
            self.possible_actions[text] = args

    def generate_possible_actions(self):
        self.possible_actions = {}
        self.add_action("look around", ("look around",))
        objects = self.visible_objects()
        for obj in objects:
            self.add_action("look at " + obj.display_name(), ("look at", obj))
        self.add_action("inventory", ("inventory",))
        for obj in objects:
            self.add_action("take " + obj.display_name(), ("take", obj))
        for obj in objects:
            for target in objects:
                if obj is not target and isinstance(target, Container):
                    text = "put " + obj.display_name() + " in " + target.display_name()
                    self.add_action(text, ("put", obj, target))
        for obj in objects:
            if isinstance(obj, Container):
                self.add_action("open " + obj.display_name(), ("open", obj))
                self.add_action("close " + obj.display_name(), ("close", obj))
        for obj in objects:
            if isinstance(obj, (Device, Stove)):
                self.add_action("turn on " + obj.display_name(), ("turn on", obj))
                self.add_action("turn off " + obj.display_name(), ("turn off", obj))
        self.add_action("wait", ("wait",))

    def describe_room(self):
        items = [obj.describe() for obj in self.root.contains if obj is not self.agent]
        if not items:
            return "You are in the kitchen. There is nothing here."
        return "You are in the kitchen. You see " + join_phrase(items) + "."

    def action_take(self, obj):
        if obj.parent is self.agent:
            return "You already have the " + obj.display_name() + "."
        if not obj.properties["isMoveable"]:
            return "The " + obj.display_name() + " cannot be picked up."
        self.agent.add_object(obj)
        return "You take the " + obj.display_name() + "."

    def action_put(self, obj, target):
        if obj.parent is not self.agent:
            return "You are not holding the " + obj.display_name() + "."
        if target.is_closed():
            return "The " + target.display_name() + " is closed."
        target.add_object(obj)
        return "You put the " + obj.display_name() + " in the " + target.display_name() + "."

    def action_inventory(self):
        if not self.agent.contains:
            return "You are not carrying anything."
        return "You are carrying " + join_phrase([o.describe() for o in self.agent.contains]) + "."

    def step(self, action_str):
        action_str = " ".join(action_str.lower().split())
        if action_str not in self.possible_actions:
            return "I don't understand that."
        if self.game_over:
            return "The game is over."
        self.num_steps += 1
        action = self.possible_actions[action_str]
        verb = action[0]
        if verb == "look around":
            observation = self.describe_room()
        elif verb == "look at":
            observation = "You see " + action[1].describe() + "."
        elif verb == "inventory":
            observation = self.action_inventory()
        elif verb == "take":
            observation = self.action_take(action[1])
        elif verb == "put":
            observation = self.action_put(action[1], action[2])
        elif verb == "open":
            observation = action[1].open()
        elif verb == "close":
            observation = action[1].close()
        elif verb == "turn on":
            observation = action[1].turn_on()
        elif verb == "turn off":
            observation = action[1].turn_off()
        elif verb == "wait":
            observation = "You wait."
        else:
            observation = "ERROR: unknown action."
        for obj in self.root.get_all_contained():
            obj.tick()
        self.calculate_score()
        if self.game_won:
            observation += "\nYou have won! Final score: " + str(self.score) + "/1."
        self.generate_possible_actions()
        return observation

    def calculate_score(self):
        if self.water.properties["temperature"] >= 100:
            self.score = 1
            self.game_won = True
            self.game_over = True


def main():
    game = BoilWaterGame(random_seed=42)
    print(game.get_task_description())
    print(game.describe_room())
    while not game.game_over:
        try:
            command = input("> ")
        except EOFError:
            break
        if command.strip() == "quit":
            break
        if command.strip() == "help":
            print("\n".join(sorted(game.possible_actions)))
            continue
        print(game.step(command))


if __name__ == "__main__":
    main()
