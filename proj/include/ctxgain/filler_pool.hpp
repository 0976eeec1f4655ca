#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace ctxgain {

// Fixed pool of neutral filler sentences. Generation cycles this pool
// under a seeded shuffle, so documents are reproducible without any
// external corpus. The pool doubles as the training text for the default
// n-gram verifier background model.
inline const std::vector<std::string>& filler_pool() {
  static const std::vector<std::string> pool = {
      "The morning train left the station a few minutes behind schedule.",
      "A light rain fell over the valley for most of the afternoon.",
      "The baker set the fresh loaves on the counter to cool.",
      "Several boats drifted slowly across the calm harbor.",
      "The library reading room stayed quiet until closing time.",
      "A gardener trimmed the hedges along the gravel path.",
      "The old clock on the tower chimed exactly at noon.",
      "Children played near the fountain in the central square.",
      "The grocer arranged the apples in neat rows by the window.",
      "A cool breeze moved through the open kitchen window.",
      "The carpenter measured the plank twice before cutting it.",
      "Lamps along the avenue switched on as the sky darkened.",
      "The ferry crossed the river every hour during the summer.",
      "A stack of newspapers waited by the door of the cafe.",
      "The museum opened a new exhibit about coastal birds.",
      "Workers repainted the fence around the school yard.",
      "The kettle whistled softly on the back of the stove.",
      "A long line formed outside the bakery on market day.",
      "The orchard produced more fruit than the family expected.",
      "Dry leaves gathered in the corners of the courtyard.",
      "The tailor pressed the finished jacket with great care.",
      "A small dog slept in the shade beneath the bench.",
      "The lighthouse keeper climbed the stairs before sunset.",
      "Fresh snow covered the rooftops of the quiet town.",
      "The violinist practiced the same passage until evening.",
      "A delivery van stopped briefly in front of the hardware store.",
      "The river rose slightly after the week of steady rain.",
      "Students carried their notebooks across the wide lawn.",
      "The cook stirred the soup while reading the recipe again.",
      "An old map hung above the desk in the study.",
      "The bus paused at the corner to let passengers board.",
      "Bright banners lined the street for the harvest festival.",
      "The clerk counted the coins and closed the register.",
      "A flock of geese passed high over the wet fields.",
      "The painter cleaned her brushes in the back room.",
      "Heavy fog settled over the bridge before dawn.",
      "The mechanic checked the engine and wiped his hands.",
      "Neighbors gathered on the porch to watch the storm pass.",
      "The florist wrapped the tulips in plain brown paper.",
      "A distant bell announced the end of the work day.",
      "The fisherman mended his nets beside the pier.",
      "Warm light spilled from the windows of the inn.",
      "The archivist labeled each box before shelving it.",
      "A narrow path wound between the two stone walls.",
      "The barista steamed the milk and called the next order.",
      "Low clouds hid the peaks for the entire morning.",
      "The postman sorted the letters into tidy bundles.",
      "A tractor moved slowly along the edge of the field.",
      "The seamstress picked new thread from the drawer.",
      "Quiet waves rolled against the wooden dock all night.",
      "The teacher wrote the week's schedule on the board.",
      "A vendor sold roasted chestnuts near the theater entrance.",
      "The janitor swept the long hallway after the last class.",
      "Thin smoke rose from the chimney of the farmhouse.",
      "The cobbler replaced the worn heel in a few minutes.",
      "A young couple studied the timetable at the platform.",
      "The brewer checked the temperature of the copper tank.",
      "Sunlight crossed the floor of the empty workshop.",
      "The editor read the final page one more time.",
      "A gray cat watched the street from the upstairs sill.",
      "The miller bagged the flour before the rain returned.",
      "Fresh paint brightened the shutters of the corner house.",
      "The surveyor noted the measurements in a small book.",
      "A slow current carried the leaves under the footbridge.",
      "The chemist arranged the bottles on the highest shelf.",
      "Early frost covered the grass behind the stables.",
      "The conductor tapped the stand and raised his baton.",
      "A patient horse waited by the gate near the barn.",
      "The gardener watered the ferns before the heat arrived.",
      "Loose gravel crunched under the wheels of the cart.",
      "The waiter folded the napkins for the evening service.",
      "A faint melody drifted from the open music hall.",
      "The mason fitted the last stone into the low wall.",
      "Steady rain tapped on the roof of the greenhouse.",
      "The butcher wrapped the order in waxed paper.",
      "A lone cyclist followed the road along the shore.",
      "The printer stacked the fresh pages by the press.",
      "Cold air moved down from the hills after midnight.",
      "The innkeeper lit the lamps in the front room.",
      "A wooden ladder leaned against the orchard wall.",
      "The potter turned the wheel with a practiced motion.",
      "Morning light reached the far end of the meadow.",
      "The locksmith tested the new key three times.",
      "A small crowd waited for the doors to open.",
      "The weaver checked the pattern against the sample.",
      "Soft moss covered the stones beside the spring.",
      "The pharmacist counted the tablets into the vial.",
      "A late swallow circled the empty market stalls.",
      "The blacksmith cooled the iron in the trough.",
      "Pale stars appeared above the line of poplars.",
      "The notary stamped the papers and filed the copy.",
      "A gentle slope led from the church to the river.",
      "The tuner listened closely and adjusted the string.",
      "Ripe pears hung low over the garden fence.",
      "The stationer refilled the rack with blue notebooks.",
      "A watchman walked the length of the warehouse twice.",
      "The beekeeper checked the hives behind the hedge.",
      "Long shadows stretched across the village green.",
      "The optician polished the lenses at the counter.",
      "A shallow stream crossed the trail below the ridge.",
      "The ranger marked the fallen tree for removal.",
      "Dust settled slowly in the beam of afternoon sun.",
      "The tinsmith hammered a seam along the bright edge.",
      "A ferry horn sounded once across the gray water.",
      "The clerk filed the invoices before the noon break.",
      "Green shoots appeared in the rows of the kitchen garden.",
      "The drover led the herd through the lower pasture.",
      "A paper kite climbed above the row of chimneys.",
      "The binder sewed the pages with strong linen thread.",
      "Warm bread scented the narrow lane behind the ovens.",
      "The pilot checked the charts before the tide turned.",
      "A single lamp burned late in the harbor office.",
      "The glazier carried the pane across the busy street.",
      "Mild weather held through the last week of the month.",
      "The cooper tightened the hoops around the new barrel.",
      "A line of laundry swayed between the two balconies.",
      "The usher showed the guests to the middle rows.",
      "Clear water filled the basin below the old pump.",
      "The saddler oiled the leather until it shone.",
      "A quiet argument ended with a shared laugh.",
      "The porter stacked the trunks beside the stairs.",
      "Thick ivy covered the north wall of the cottage.",
      "The engraver steadied his hand over the plate.",
      "A sudden gust scattered the petals across the walk.",
      "The chandler trimmed the wicks and boxed the candles.",
      "Low sun turned the windows of the mill to gold.",
      "The falconer whistled once and raised his glove.",
      "A worn path circled the pond behind the school.",
      "The clockmaker set each hand with a thin tool.",
      "Heavy carts rumbled over the cobbles near the gate.",
      "The apiarist strained the honey into glass jars.",
      "A round moon rose behind the bare orchard.",
      "The wheelwright rolled the finished rim into the yard.",
      "Fresh tracks crossed the snow beside the wood pile.",
      "The stonecutter squared the block with even strokes.",
      "A kettle of tea steamed on the corner table.",
      "The bellringer climbed the narrow steps at dusk.",
      "Spring water ran cold from the iron spout.",
      "The framer joined the corners and checked the angle.",
      "A brown hare crossed the lane ahead of the walkers.",
      "The plasterer smoothed the wall with a wide blade.",
      "Faint thunder rolled beyond the eastern hills.",
      "The roofer counted the tiles stacked by the ladder.",
      "A child traced letters in the dust of the path.",
      "The vintner tasted the young wine and nodded.",
      "Still air held the scent of cut hay over the farm.",
      "The turner shaped the spindle on the old lathe.",
      "A market bell opened the trading at eight.",
      "The shepherd counted the flock at the narrow gate.",
      "Clean sheets snapped in the wind on the long line.",
      "The joiner sanded the drawer until it slid freely.",
      "A slow barge passed under the brick arch.",
      "The keeper fed the lamps with oil before dark.",
      "Ripe tomatoes weighed down the vines by the shed.",
      "The currier worked the hide across the beam.",
      "A small bird nested in the lamp above the door.",
      "The draper unrolled the bolt of gray cloth.",
      "Evening settled gently over the tiled rooftops.",
      "The farrier checked the shoe against the hoof.",
      "A straight furrow ran the length of the near field.",
      "The glassblower turned the rod in the bright flame.",
      "Soft rain washed the chalk marks from the wall.",
      "The hatter brushed the felt and set the brim.",
      "A long shadow fell from the water tower at five.",
      "The skipper coiled the rope on the forward deck.",
      "Mown grass lay in rows across the south lawn.",
      "The cartwright greased the axle and spun the wheel.",
      "A copper pot simmered quietly at the back burner.",
      "The forester measured the oak with a steel tape.",
      "Pigeons settled on the ledge above the arcade.",
      "The grinder sharpened the shears in a shower of sparks.",
      "A mild current turned the small wheel at the weir.",
      "The packer lined the crate with clean straw.",
      "Late light lingered on the face of the cliff.",
      "The sawyer stacked the boards under the open shed.",
      "A careful hand wound the twine around the parcel.",
      "The smith quenched the blade and checked the edge.",
      "Quiet talk continued at the long table until ten.",
      "The spinner fed the wool with an even pace.",
      "A narrow boat waited in the lock below the inn.",
      "The thatcher combed the reed along the ridge line.",
      "Cold water ran over the stones below the falls.",
      "The wainwright fitted the tongue to the front axle.",
      "A yellow leaf landed on the open ledger.",
      "The warden latched the gate after the last visitor.",
      "Dim light showed under the door of the back office.",
      "The fuller pressed the cloth between the rollers.",
      "A steady hand poured the wax into the molds.",
      "The herbalist hung the bundles from the beam to dry.",
      "Round bales dotted the field beyond the hedgerow.",
      "The lampwright bent the bracket to match the drawing.",
      "A faint path led from the stile to the spring.",
      "The netmaker knotted the cord with quick fingers.",
      "Warm rain passed before the fair opened at nine.",
      "The ropewalk echoed with the turn of the wheel.",
      "A patched sail dried on the rail of the sloop.",
      "The salter packed the fish in even layers.",
  };
  return pool;
}

}  // namespace ctxgain
